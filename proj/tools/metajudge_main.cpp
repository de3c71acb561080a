#include "metajudge/cli.hpp"

int main(int argc, char** argv) { return metajudge::cli::run_cli(argc, argv); }
