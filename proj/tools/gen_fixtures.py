#!/usr/bin/env python3
"""Regenerates the committed test fixtures under tests/fixtures/.

Three fixture sets come out of this script:

  parser_corpus.jsonl   surface forms for verdict/score extraction
  e2e/                  12-sample dataset + scripted judge covering all
                        seven strategies with hand-computed outcomes
  cachefix/             8 samples sharing 5 distinct outputs, for the
                        reasoning-cache reuse contract

The expected verdicts and accuracies encoded here are the oracles the test
suite asserts against; change them only together with the tests.
"""

import json
import math
import os

HERE = os.path.dirname(os.path.abspath(__file__))
FIXTURES = os.path.join(HERE, os.pardir, "tests", "fixtures")


def write_jsonl(path, records):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def write_json(path, doc):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(doc, ensure_ascii=False, indent=2) + "\n")


# ---------------------------------------------------------------------------
# Parser corpus
# ---------------------------------------------------------------------------

def parser_corpus():
    cases = []

    def pairwise(name, text, expect=None, error=None, tie_allowed=False):
        case = {"name": name, "kind": "pairwise", "text": text,
                "tie_allowed": tie_allowed}
        if expect is not None:
            case["expect"] = expect
        if error is not None:
            case["error"] = error
        cases.append(case)

    def likert(name, text, expect=None, error=None):
        case = {"name": name, "kind": "likert", "text": text}
        if expect is not None:
            case["expect"] = expect
        if error is not None:
            case["error"] = error
        cases.append(case)

    # Canonical decision lines.
    pairwise("canonical_a", "Decision: Output (a)", expect="A")
    pairwise("canonical_b_verbatim", "Decision: Output (b)", expect="B")
    pairwise("canonical_lowercase", "decision: output (b)", expect="B")
    pairwise("canonical_upper_letter", "Decision: Output (A)", expect="A")
    pairwise("canonical_no_parens", "Decision: Output B", expect="B")
    pairwise("canonical_markdown_bold", "**Decision: Output (a)**", expect="A")
    pairwise("canonical_dash", "Decision - Output (b)", expect="B")
    pairwise("canonical_is_colon", "Decision is: Output (a)", expect="A")
    pairwise("canonical_paren_only", "Decision: (b)", expect="B")
    pairwise("canonical_bare_upper", "Decision: A", expect="A")
    pairwise("canonical_bare_lower", "Decision: b", expect="B")
    pairwise("canonical_after_analysis",
             "Output (a) sticks to the brief while Output (b) pads.\n"
             "Decision: Output (a)\nThat is final.", expect="A")
    pairwise("canonical_last_wins",
             "Decision: Output (a)\nOn reflection the constraint matters more.\n"
             "Decision: Output (b)", expect="B")
    pairwise("canonical_skips_prose_decision",
             "The decision hinges on accuracy alone.\nDecision: Output (b)",
             expect="B")

    # Ties.
    pairwise("tie_allowed", "Decision: Tie", expect="Tie", tie_allowed=True)
    pairwise("tie_forbidden", "Decision: Tie", error="illegal_tie",
             tie_allowed=False)
    pairwise("tie_phrase_allowed", "It is a tie.", expect="Tie",
             tie_allowed=True)
    pairwise("tie_phrase_forbidden", "It is a tie.", error="illegal_tie",
             tie_allowed=False)

    # Verdict phrases (no canonical line).
    pairwise("phrase_therefore_verbatim", "Therefore, Output B is better.",
             expect="B")
    pairwise("phrase_is_better", "Output (a) is better because it is concise.",
             expect="A")
    pairwise("phrase_chosen", "I would choose Output (b) here.", expect="B")
    pairwise("phrase_better_is", "The better answer is (a).", expect="A")
    pairwise("phrase_stronger", "Output A is stronger overall.", expect="A")
    pairwise("phrase_was_preferable",
             "Output (b) was preferable given the constraints.", expect="B")
    pairwise("phrase_last_mention_wins",
             "Output (a) is better on style. However, Output (b) is clearly "
             "better on substance.", expect="B")
    pairwise("phrase_recency_over_first",
             "I prefer output (a), though output (b) is slightly better.",
             expect="B")
    pairwise("phrase_embedded_in_cot",
             "Output A looks knowledgeable but ignores the one-word "
             "constraint. Output B obeys it. Therefore, Output B is better.",
             expect="B")

    # Failures.
    pairwise("empty_text", "", error="parse_empty")
    pairwise("no_verdict", "Both responses handle the request adequately.",
             error="parse_empty")
    pairwise("article_not_verdict", "Decision: a close call, but fine.",
             error="parse_empty")
    pairwise("ambiguous_decision_line",
             "Decision: Output (a) or Output (b), hard to say.",
             error="parse_ambiguous")

    # Likert scores.
    likert("rating_canonical", "Rating: 4", expect=4)
    likert("score_canonical", "Score: 3", expect=3)
    likert("rating_dash", "rating - 5", expect=5)
    likert("rating_is", "Rating is 2", expect=2)
    likert("out_of_five_denominator", "I'd give this a 3 out of 5.", expect=3)
    likert("bare_digit", "4", expect=4)
    likert("trailing_digit", "The essay merits a 4.", expect=4)
    likert("marker_newline", "Rating:\n4 stars", expect=4)
    likert("plural_scores_fallback", "Scores: first 2, then improved.",
           expect=2)
    likert("score_out_of_range", "Score: 9", error="out_of_range")
    likert("score_zero", "Score: 0", error="out_of_range")
    likert("fraction_excluded", "8/10 for effort", error="parse_empty")
    likert("decimal_excluded", "Rating: 4.5", error="parse_empty")
    likert("no_digits", "No digits here.", error="parse_empty")

    return cases


# ---------------------------------------------------------------------------
# End-to-end fixture: dataset "synthbar"
# ---------------------------------------------------------------------------

# (id, subset, label, instruction, output_a, output_b)
SAMPLES = [
    ("S01", "alpha", "A",
     "Summarize the water cycle in exactly two sentences.",
     "Water evaporates from oceans and lakes, rising as vapor that condenses"
     " into clouds. It then falls as precipitation and flows back to the sea,"
     " repeating the loop.",
     "The water cycle is a fascinating topic spanning evaporation,"
     " condensation, precipitation, collection, runoff, infiltration,"
     " transpiration, and sublimation, each deserving its own paragraph."),
    ("S02", "alpha", "A",
     "List three primary colors, one per line.",
     "Red\nYellow\nBlue",
     "There are many wonderful colors; artists often start from red, orange,"
     " yellow, green, blue, indigo, and violet."),
    ("S03", "alpha", "A",
     "Translate 'good morning' into French.",
     "Bonjour.",
     "Good morning is a common greeting; in Spanish it is 'buenos dias'."),
    ("S04", "alpha", "A",
     "Give the boiling point of water at sea level in Celsius.",
     "100 degrees Celsius.",
     "Water boils at 100 C when at sea level."),
    ("S05", "alpha", "A",
     "Write a haiku about autumn.",
     "Crisp leaves drift and fall / amber light on quiet paths / the year"
     " exhales slow",
     "Autumn is the season between summer and winter, known for falling"
     " leaves, cooler weather, and harvest festivals around the world."),
    ("S06", "beta", "A",
     "Name the capital of Japan.",
     "Tokyo.",
     "Japan is an island nation in East Asia with a rich history; Kyoto"
     " served as its capital for centuries."),
    ("S07", "beta", "B",
     "Reply with the single word 'yes' or 'no': is the Earth round?",
     "The Earth is indeed round, an oblate spheroid to be precise, a fact"
     " established by centuries of astronomy and confirmed by satellites.",
     "Yes"),
    ("S08", "beta", "B",
     "State the sum of 2 and 2, digits only.",
     "The sum of two and two equals four, a foundational fact of arithmetic"
     " taught in early schooling.",
     "4"),
    ("S09", "beta", "B",
     "Quote the first line of 'Hamlet' exactly.",
     "'To be, or not to be, that is the question' -- the most famous line of"
     " Hamlet, delivered with great gravity.",
     "'Who's there?'"),
    ("S10", None, "B",
     "Provide the chemical formula for table salt.",
     "Table salt, an essential mineral in human diets, has been traded for"
     " millennia and seasons nearly every cuisine.",
     "NaCl"),
    ("S11", None, "B",
     "Give the square root of 81, digits only.",
     "The square root of eighty-one is of course nine, since nine squared is"
     " eighty-one.",
     "9"),
    ("S12", None, "B",
     "Name the author of 'Pride and Prejudice', surname only.",
     "That celebrated novel was penned by the inimitable Jane Austen, whose"
     " wit defined an era of English letters.",
     "Austen"),
]

# Pointwise weighted-sum scores per sample: (score_a, score_b). Each value is
# realized as a two-candidate (or point-mass) token table whose expected
# value is exactly the number shown.
POINTWISE_SCORES = {
    "S01": (4.2, 3.1), "S02": (4.8, 2.0), "S03": (3.6, 3.5),
    "S04": (3.0, 3.0), "S05": (4.0, 1.6), "S06": (3.9, 3.2),
    "S07": (4.5, 3.8), "S08": (4.1, 3.9), "S09": (4.4, 2.9),
    "S10": (3.7, 3.3), "S11": (2.8, 4.6), "S12": (2.2, 4.9),
}

# Scripted letters per strategy (forward presentation order).
PAIRWISE_FWD = {"S01": "a", "S02": "a", "S03": "a", "S04": "a", "S05": "a",
                "S06": "a", "S07": "b", "S08": "b", "S09": "a", "S10": "b",
                "S11": "a", "S12": "a"}
# Swapped presentation: content-consistent except S12, which always says (a).
PAIRWISE_SWAP = {"S01": "b", "S02": "b", "S03": "b", "S04": "b", "S05": "b",
                 "S06": "b", "S07": "a", "S08": "a", "S09": "b", "S10": "a",
                 "S11": "b", "S12": "a"}
PREPAIR_FINAL = {"S01": "a", "S02": "a", "S03": "a", "S04": "a", "S05": "a",
                 "S06": "a", "S07": "b", "S08": "b", "S09": "a", "S10": "b",
                 "S11": "b", "S12": "a"}
STAR_FINAL = {"S01": "a", "S02": "a", "S03": "a", "S04": "a", "S05": "a",
              "S06": "a", "S07": "b", "S08": "b", "S09": "a", "S10": "a",
              "S11": "a", "S12": "a"}

COT_FWD = {
    "S01": "The first output answers in exactly two sentences and stays"
           " factual; the second rambles.\nDecision: Output (a)",
    "S02": "Both outputs are fine.",
    "S03": "Output (a) gives the French translation requested; Output (b)"
           " answers a different question.\nDecision: Output (a)",
    "S04": "Both state the right value, but the first is cleaner.\n"
           "Decision: Output (a)",
    "S05": "Only the first is actually a haiku.\nDecision: Output (a)",
    "S06": "The first names the capital directly.\nDecision: Output (a)",
    "S07": "Output A looks knowledgeable but ignores the one-word constraint."
           " Output B obeys it. Therefore, Output B is better.",
    "S08": "The instruction says digits only; only the second complies.\n"
           "Decision: Output (b)",
    "S09": "The first quotes the famous soliloquy with confidence.\n"
           "Decision: Output (a)",
    "S10": "The second output is the formula itself, which is what was"
           " asked.\nDecision: Output (b)",
    "S11": "The first explains the reasoning nicely.\nDecision: Output (a)",
    "S12": "The first gives a complete, eloquent answer.\n"
           "Decision: Output (a)",
}
COT_SWAP_LETTER = {"S01": "b", "S02": None, "S03": "b", "S04": "b",
                   "S05": "b", "S06": "b", "S07": "a", "S08": "a",
                   "S09": "b", "S10": "a", "S11": "b", "S12": "a"}

# Per-output reasoning texts. The S07-B note carries the exact wording the
# downstream tests look for.
def point_reason_text(sid, side, output_text):
    sentinel = f"[QO-{sid}-{side}]"
    if sid == "S07" and side == "B":
        detail = ("it precisely executes the instruction; a single word was"
                  " demanded and a single word is given.")
    elif sid == "S09" and side == "A":
        detail = ("confident, canonical quotation presented with authority;"
                  " rich context.")
    else:
        short = output_text.split("\n")[0][:40]
        detail = f"notes on '{short}': coverage, tone, and fit assessed."
    return f"isolated-review {sentinel}: {detail}"


def decision_line(letter):
    return f"Decision: Output ({letter})"


def logprob_table(score):
    """Token table over scores 1..5 whose expected value equals `score`."""
    lower = int(math.floor(score))
    upper = int(math.ceil(score))
    if lower == upper:
        return [[[str(lower), 0.0]]]
    p_upper = round(score - lower, 10)
    p_lower = round(1.0 - p_upper, 10)
    first, second = (upper, lower) if p_upper >= p_lower else (lower, upper)
    p_first, p_second = max(p_upper, p_lower), min(p_upper, p_lower)
    return [[[str(first), math.log(p_first)], [str(second), math.log(p_second)]]]


def e2e_records():
    records = []
    for sid, subset, label, instruction, out_a, out_b in SAMPLES:
        record = {
            "id": sid,
            "instruction": f"[QI-{sid}] {instruction}",
            "output_a": f"[QO-{sid}-A] {out_a}",
            "output_b": f"[QO-{sid}-B] {out_b}",
            "label": label,
        }
        if subset:
            record["subset"] = subset
        records.append(record)
    return records


def e2e_rules():
    rules = []

    def rule(**kwargs):
        rules.append(kwargs)

    # Criteria generation: one generic answer for every instruction.
    rule(match="Propose evaluation criteria",
         response="criteria-block:\n"
                  "1. Instruction fit: does the output do exactly what was"
                  " asked, no more and no less?\n"
                  "2. Accuracy of the content.\n"
                  "3. Clarity and brevity.")

    # Pointwise single judging: score tables keyed by the output sentinel.
    for sid, _, _, _, _, _ in SAMPLES:
        score_a, score_b = POINTWISE_SCORES[sid]
        for side, score in (("A", score_a), ("B", score_b)):
            table = logprob_table(score)
            rule(match_all=["Respond with only a single digit",
                            f"[QO-{sid}-{side}]"],
                 response=table[0][0][0],
                 token_logprobs=table)

    # Criteria-aware per-output reasoning must be matched before the plain
    # form: its prompt contains the plain marker text as well.
    for sid, _, _, _, out_a, out_b in SAMPLES:
        for side, text in (("A", out_a), ("B", out_b)):
            rule(match_all=["checking it against the tailored criteria",
                            f"[QO-{sid}-{side}]"],
                 response="sgm-" + point_reason_text(sid, side, text))

    # Pair-visible per-output reasoning ("assess (a) with (b) in view").
    for sid, _, _, _, out_a, out_b in SAMPLES:
        for side in ("A", "B"):
            rule(match_all=["Assess Output (a) in light of Output (b)",
                            f"(a)]\n[QO-{sid}-{side}]"],
                 response=f"contextual-review [QO-{sid}-{side}]: compared"
                          " with its counterpart, strengths and weaknesses"
                          " noted.")

    # Plain per-output reasoning.
    for sid, _, _, _, out_a, out_b in SAMPLES:
        for side, text in (("A", out_a), ("B", out_b)):
            rule(match_all=["List the strengths and weaknesses",
                            f"[QO-{sid}-{side}]"],
                 response=point_reason_text(sid, side, text))

    # Final judgments over pair-visible reasoning come first: those prompts
    # embed "contextual-review" explanation text.
    for sid, _, _, _, _, _ in SAMPLES:
        rule(match_all=["two independent expert assessments",
                        "contextual-review", f"[QI-{sid}]"],
             response=decision_line(STAR_FINAL[sid]))

    # Final judgments over isolated reasoning (criteria-aware or not).
    for sid, _, _, _, _, _ in SAMPLES:
        rule(match_all=["two independent expert assessments", f"[QI-{sid}]"],
             response=decision_line(PREPAIR_FINAL[sid]))

    # Criteria-aware pairwise judging, order-aware via the (a)-slot sentinel.
    for sid, _, _, _, _, _ in SAMPLES:
        rule(match_all=["Judge against the tailored criteria",
                        f"(a)]\n[QO-{sid}-A]"],
             response=decision_line(PAIRWISE_FWD[sid]))
        rule(match_all=["Judge against the tailored criteria",
                        f"(a)]\n[QO-{sid}-B]"],
             response=decision_line(PAIRWISE_SWAP[sid]))

    # Plain pairwise judging.
    for sid, _, _, _, _, _ in SAMPLES:
        rule(match_all=["Reply with the decision line only",
                        f"(a)]\n[QO-{sid}-A]"],
             response=decision_line(PAIRWISE_FWD[sid]))
        rule(match_all=["Reply with the decision line only",
                        f"(a)]\n[QO-{sid}-B]"],
             response=decision_line(PAIRWISE_SWAP[sid]))

    # Step-by-step pairwise judging with free-form conclusions.
    for sid, _, _, _, _, _ in SAMPLES:
        rule(match_all=["Think step by step", f"(a)]\n[QO-{sid}-A]"],
             response=COT_FWD[sid])
        letter = COT_SWAP_LETTER[sid]
        swap_response = ("Both outputs are fine." if letter is None
                         else "Seen in this order the choice is unchanged.\n"
                              + decision_line(letter))
        rule(match_all=["Think step by step", f"(a)]\n[QO-{sid}-B]"],
             response=swap_response)

    return rules


def e2e_catalogs():
    datasets = {"datasets": [{
        "name": "synthbar",
        "paths": ["records/synthbar.jsonl"],
        "format": "jsonl",
        "tie_allowed": False,
        "rules_injection": True,
    }]}
    backends = {"backends": [
        {"name": "scripted-judge", "kind": "scripted", "script": "rules.jsonl",
         "model_id": "scripted-judge-1", "supports_token_probabilities": True,
         "max_in_flight": 4, "requests_per_minute": 6000, "retry_limit": 2},
        {"name": "scripted-noprobs", "kind": "scripted",
         "script": "rules.jsonl", "model_id": "scripted-noprobs-1",
         "supports_token_probabilities": False, "max_in_flight": 4},
    ]}
    manifest = {
        "datasets_file": "datasets.json",
        "backends_file": "backends.json",
        "dataset": "synthbar",
        "backend": "scripted-judge",
        "strategy": "prepair",
        "temperature": 0.0,
        "order_swap": False,
        "inconclusive_credit": 0.0,
        "workers": 2,
    }
    return datasets, backends, manifest


# Hand-computed outcomes for the 12-sample fixture; "verdicts" are in sample
# order S01..S12 ("I" = inconclusive), accuracies in percent.
E2E_EXPECTED = {
    "pointwise": {
        "verdicts": "AAAIAAAAAABB",
        "calls_per_sample": 2,
        "accuracy_pct": 58.33,
        "subsets": {"alpha": 80.0, "beta": 25.0, "(none)": 66.67},
    },
    "pairwise": {
        "verdicts": "AAAAAABBABAA",
        "calls_per_sample": 1,
        "accuracy_pct": 75.0,
        "subsets": {"alpha": 100.0, "beta": 75.0, "(none)": 33.33},
    },
    "pairwise-cot": {
        "verdicts": "AIAAAABBABAA",
        "calls_per_sample": 1,
        "accuracy_pct": 66.67,
        "subsets": {"alpha": 80.0, "beta": 75.0, "(none)": 33.33},
    },
    "prepair": {
        "verdicts": "AAAAAABBABBA",
        "calls_per_sample": 3,
        "accuracy_pct": 83.33,
        "subsets": {"alpha": 100.0, "beta": 75.0, "(none)": 66.67},
    },
    "prepair-star": {
        "verdicts": "AAAAAABBAAAA",
        "calls_per_sample": 3,
        "accuracy_pct": 66.67,
        "subsets": {"alpha": 100.0, "beta": 75.0, "(none)": 0.0},
    },
    "pairwise-sgm": {
        "verdicts": "AAAAAABBABAA",
        "calls_per_sample": 2,
        "accuracy_pct": 75.0,
        "subsets": {"alpha": 100.0, "beta": 75.0, "(none)": 33.33},
    },
    "prepair-sgm": {
        "verdicts": "AAAAAABBABBA",
        "calls_per_sample": 4,
        "accuracy_pct": 83.33,
        "subsets": {"alpha": 100.0, "beta": 75.0, "(none)": 66.67},
    },
}


def check_expectations():
    labels = {sid: label for sid, _, label, _, _, _ in SAMPLES}
    subsets = {sid: subset or "(none)" for sid, subset, _, _, _, _ in SAMPLES}
    order = [sid for sid, _, _, _, _, _ in SAMPLES]

    for strategy, expected in E2E_EXPECTED.items():
        verdicts = expected["verdicts"]
        assert len(verdicts) == len(order), strategy
        correct = {}
        totals = {}
        for sid, verdict in zip(order, verdicts):
            key = subsets[sid]
            totals[key] = totals.get(key, 0) + 1
            if verdict == labels[sid]:
                correct[key] = correct.get(key, 0) + 1
        total_correct = sum(correct.values())
        accuracy = round(100.0 * total_correct / len(order), 2)
        assert accuracy == expected["accuracy_pct"], (
            strategy, accuracy, expected["accuracy_pct"])
        for key, want in expected["subsets"].items():
            got = round(100.0 * correct.get(key, 0) / totals[key], 2)
            assert got == want, (strategy, key, got, want)


# ---------------------------------------------------------------------------
# Cache-reuse fixture: 8 samples over 5 distinct outputs
# ---------------------------------------------------------------------------

CACHE_INSTRUCTION = ("[QC-I] Draft a one-sentence status note for the weekly"
                     " report.")
CACHE_OUTPUTS = {
    1: "[QC-O1] Milestones on track; demo scheduled for Friday.",
    2: "[QC-O2] We did some things this week and will do more next week.",
    3: "[QC-O3] Integration tests now cover the billing flow end to end.",
    4: "[QC-O4] Status: green. Next: keep it green.",
    5: "[QC-O5] The team shipped the importer and closed nine support"
       " tickets.",
}
CACHE_PAIRS = [(1, 2), (1, 3), (2, 3), (2, 4), (3, 4), (3, 5), (4, 5), (1, 5)]


def cachefix_records():
    records = []
    for index, (left, right) in enumerate(CACHE_PAIRS, start=1):
        records.append({
            "id": f"C{index:02d}",
            "instruction": CACHE_INSTRUCTION,
            "output_a": CACHE_OUTPUTS[left],
            "output_b": CACHE_OUTPUTS[right],
            "label": "A",
        })
    return records


def cachefix_rules():
    rules = []
    for key in sorted(CACHE_OUTPUTS):
        rules.append({
            "match_all": ["List the strengths and weaknesses", f"[QC-O{key}]"],
            "response": f"isolated-review [QC-O{key}]: clear, specific, and"
                        " grounded in the week's work.",
            "delay_ms": 25,
        })
    rules.append({
        "match": "two independent expert assessments",
        "response": "Decision: Output (a)",
    })
    return rules


def main():
    check_expectations()

    write_jsonl(os.path.join(FIXTURES, "parser_corpus.jsonl"), parser_corpus())

    e2e = os.path.join(FIXTURES, "e2e")
    write_jsonl(os.path.join(e2e, "records", "synthbar.jsonl"), e2e_records())
    write_jsonl(os.path.join(e2e, "rules.jsonl"), e2e_rules())
    datasets, backends, manifest = e2e_catalogs()
    write_json(os.path.join(e2e, "datasets.json"), datasets)
    write_json(os.path.join(e2e, "backends.json"), backends)
    write_json(os.path.join(e2e, "prepair.run.json"), manifest)
    write_json(os.path.join(e2e, "expected.json"), E2E_EXPECTED)

    cachefix = os.path.join(FIXTURES, "cachefix")
    write_jsonl(os.path.join(cachefix, "dataset.jsonl"), cachefix_records())
    write_jsonl(os.path.join(cachefix, "rules.jsonl"), cachefix_rules())
    write_json(os.path.join(cachefix, "datasets.json"), {"datasets": [{
        "name": "cachepairs",
        "path": "dataset.jsonl",
        "tie_allowed": False,
        "rules_injection": True,
    }]})
    write_json(os.path.join(cachefix, "backends.json"), {"backends": [
        {"name": "scripted-judge", "kind": "scripted", "script": "rules.jsonl",
         "model_id": "scripted-judge-1", "supports_token_probabilities": True,
         "max_in_flight": 4},
    ]})

    print(f"fixtures written under {os.path.abspath(FIXTURES)}")


if __name__ == "__main__":
    main()
