#include "markov/cli.hpp"

int main(int argc, char** argv) { return markov::run_cli(argc, argv); }
