#include "raver/cli.hpp"

int main(int argc, char** argv) { return raver::run_cli(argc, argv); }
