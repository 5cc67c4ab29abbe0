#include "mpsr/cli.hpp"

int main(int argc, char** argv) { return mpsr::run_cli(argc, argv); }
