#include "metajudge/prompts.hpp"

namespace metajudge::prompts::detail {

namespace {

constexpr const char* kThreeWayDecisionForms =
    "Give your verdict on the last line, in exactly one of these forms:\n"
    "Decision: Output (a)\n"
    "Decision: Output (b)\n"
    "Decision: Tie";

constexpr const char* kTwoWayDecisionForms =
    "A tie is not allowed. Give your verdict on the last line, in exactly one "
    "of these forms:\n"
    "Decision: Output (a)\n"
    "Decision: Output (b)";

}  // namespace

void install_builtin_templates(PromptRegistry& r) {
  using enum PromptFamily;
  using enum Phase;

  // -------------------------------------------------------------------------
  // Three-option family: ties are legal, no injected rules block.
  // -------------------------------------------------------------------------

  r.register_template({ThreeWay, StrategyKind::Pointwise, SingleJudge}, "v1",
                      R"(You are an impartial judge. Rate how well the response below follows the instruction, weighing helpfulness, relevance, accuracy, and level of detail. Rate the response on a scale of 1 to 5.

[Instruction]
{instruction}

[Response]
{output}

After a brief justification, give your verdict on the last line in exactly this form:
Rating: <1-5>
)");

  r.register_template({ThreeWay, StrategyKind::Pairwise, PairJudge}, "v1",
                      std::string(R"(You are an impartial judge comparing two outputs written for the same instruction. Pick the output that follows the instruction better; if they are equally good, call it a tie. Reply with the decision line only.

[Instruction]
{instruction}

[Output (a)]
{output_a}

[Output (b)]
{output_b}

)") + kThreeWayDecisionForms + "\n");

  r.register_template({ThreeWay, StrategyKind::PairwiseCoT, PairJudge}, "v1",
                      std::string(R"(You are an impartial judge comparing two outputs written for the same instruction. Think step by step: first explain how each output handles the instruction, then decide which one is better, or whether they are tied.

[Instruction]
{instruction}

[Output (a)]
{output_a}

[Output (b)]
{output_b}

)") + kThreeWayDecisionForms + "\n");

  r.register_template({ThreeWay, StrategyKind::PRePair, PointReason}, "v1",
                      R"(You are evaluating a single response on its own. List the strengths and weaknesses of the response with respect to the instruction. Do not give a score and do not compare it to anything.

[Instruction]
{instruction}

[Response]
{output}
)");

  r.register_template({ThreeWay, StrategyKind::PRePair, FinalJudge}, "v1",
                      std::string(R"(You are an impartial judge comparing two outputs written for the same instruction. You are given two independent expert assessments, one per output. Weigh the assessments against the instruction, then decide which output is better, or whether they are tied.

[Instruction]
{instruction}

[Output (a)]
{output_a}

[Assessment of Output (a)]
{explanation_a}

[Output (b)]
{output_b}

[Assessment of Output (b)]
{explanation_b}

)") + kThreeWayDecisionForms + "\n");

  r.register_template({ThreeWay, StrategyKind::PRePairStar, PairReason}, "v1",
                      R"(You are evaluating one output of a pair. Assess Output (a) in light of Output (b): list the strengths and weaknesses of Output (a), using Output (b) only as context. Do not give a score and do not pick a winner.

[Instruction]
{instruction}

[Output (a)]
{output_a}

[Output (b)]
{output_b}
)");

  r.register_template({ThreeWay, StrategyKind::PairwiseSGM, MetricGen}, "v1",
                      R"(Propose evaluation criteria tailored to the instruction below. Write a numbered list of three to five concrete criteria a careful reviewer should check, most important first. Do not evaluate anything yet.

[Instruction]
{instruction}
)");

  r.register_template({ThreeWay, StrategyKind::PairwiseSGM, PairJudge}, "v1",
                      std::string(R"(You are an impartial judge comparing two outputs written for the same instruction. Judge against the tailored criteria below: weigh each criterion, then decide which output is better, or whether they are tied.

[Criteria]
{metrics}

[Instruction]
{instruction}

[Output (a)]
{output_a}

[Output (b)]
{output_b}

)") + kThreeWayDecisionForms + "\n");

  r.register_template({ThreeWay, StrategyKind::PRePairSGM, PointReason}, "v1",
                      R"(You are evaluating a single response on its own. List the strengths and weaknesses of the response with respect to the instruction, checking it against the tailored criteria below. Do not give a score and do not compare it to anything.

[Criteria]
{metrics}

[Instruction]
{instruction}

[Response]
{output}
)");

  r.register_template({ThreeWay, StrategyKind::PRePairSGM, FinalJudge}, "v1",
                      std::string(R"(You are an impartial judge comparing two outputs written for the same instruction. You are given two independent expert assessments, one per output, prepared against the tailored criteria below. Weigh the assessments against the criteria, then decide which output is better, or whether they are tied.

[Criteria]
{metrics}

[Instruction]
{instruction}

[Output (a)]
{output_a}

[Assessment of Output (a)]
{explanation_a}

[Output (b)]
{output_b}

[Assessment of Output (b)]
{explanation_b}

)") + kThreeWayDecisionForms + "\n");

  // -------------------------------------------------------------------------
  // Two-option family: a winner must be named, and every judging prompt
  // carries the evaluation-rules block.
  // -------------------------------------------------------------------------

  r.register_template({TwoWay, StrategyKind::Pointwise, SingleJudge}, "v1",
                      R"(You are an impartial judge. Score how well the response below follows the instruction on a scale of 1 to 5.

{rules}

[Instruction]
{instruction}

[Response]
{output}

Respond with only a single digit from 1 to 5. Do not write anything else.
)");

  r.register_template({TwoWay, StrategyKind::Pairwise, PairJudge}, "v1",
                      std::string(R"(You are an impartial judge comparing two outputs written for the same instruction. Pick the output that follows the instruction better. Reply with the decision line only.

{rules}

[Instruction]
{instruction}

[Output (a)]
{output_a}

[Output (b)]
{output_b}

)") + kTwoWayDecisionForms + "\n");

  r.register_template({TwoWay, StrategyKind::PairwiseCoT, PairJudge}, "v1",
                      std::string(R"(You are an impartial judge comparing two outputs written for the same instruction. Think step by step: first explain how each output handles the instruction, then decide which one is better.

{rules}

[Instruction]
{instruction}

[Output (a)]
{output_a}

[Output (b)]
{output_b}

)") + kTwoWayDecisionForms + "\n");

  r.register_template({TwoWay, StrategyKind::PRePair, PointReason}, "v1",
                      R"(You are evaluating a single response on its own. List the strengths and weaknesses of the response with respect to the instruction. Do not give a score and do not compare it to anything.

{rules}

[Instruction]
{instruction}

[Response]
{output}
)");

  r.register_template({TwoWay, StrategyKind::PRePair, FinalJudge}, "v1",
                      std::string(R"(You are an impartial judge comparing two outputs written for the same instruction. You are given two independent expert assessments, one per output. Weigh the assessments against the instruction, then decide which output is better.

{rules}

[Instruction]
{instruction}

[Output (a)]
{output_a}

[Assessment of Output (a)]
{explanation_a}

[Output (b)]
{output_b}

[Assessment of Output (b)]
{explanation_b}

)") + kTwoWayDecisionForms + "\n");

  r.register_template({TwoWay, StrategyKind::PRePairStar, PairReason}, "v1",
                      R"(You are evaluating one output of a pair. Assess Output (a) in light of Output (b): list the strengths and weaknesses of Output (a), using Output (b) only as context. Do not give a score and do not pick a winner.

{rules}

[Instruction]
{instruction}

[Output (a)]
{output_a}

[Output (b)]
{output_b}
)");

  r.register_template({TwoWay, StrategyKind::PairwiseSGM, MetricGen}, "v1",
                      R"(Propose evaluation criteria tailored to the instruction below. Write a numbered list of three to five concrete criteria a careful reviewer should check, most important first. Do not evaluate anything yet.

[Instruction]
{instruction}
)");

  r.register_template({TwoWay, StrategyKind::PairwiseSGM, PairJudge}, "v1",
                      std::string(R"(You are an impartial judge comparing two outputs written for the same instruction. Judge against the tailored criteria below: weigh each criterion, then decide which output is better.

{rules}

[Criteria]
{metrics}

[Instruction]
{instruction}

[Output (a)]
{output_a}

[Output (b)]
{output_b}

)") + kTwoWayDecisionForms + "\n");

  r.register_template({TwoWay, StrategyKind::PRePairSGM, PointReason}, "v1",
                      R"(You are evaluating a single response on its own. List the strengths and weaknesses of the response with respect to the instruction, checking it against the tailored criteria below. Do not give a score and do not compare it to anything.

{rules}

[Criteria]
{metrics}

[Instruction]
{instruction}

[Response]
{output}
)");

  r.register_template({TwoWay, StrategyKind::PRePairSGM, FinalJudge}, "v1",
                      std::string(R"(You are an impartial judge comparing two outputs written for the same instruction. You are given two independent expert assessments, one per output, prepared against the tailored criteria below. Weigh the assessments against the criteria, then decide which output is better.

{rules}

[Criteria]
{metrics}

[Instruction]
{instruction}

[Output (a)]
{output_a}

[Assessment of Output (a)]
{explanation_a}

[Output (b)]
{output_b}

[Assessment of Output (b)]
{explanation_b}

)") + kTwoWayDecisionForms + "\n");
}

}  // namespace metajudge::prompts::detail
