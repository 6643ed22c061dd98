#include "loggraph/pipeline/commands.hpp"

int main(int argc, char** argv) { return loggraph::pipeline::run_cli(argc, argv); }
