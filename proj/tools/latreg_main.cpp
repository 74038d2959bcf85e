#include "latreg/cli.hpp"

int main(int argc, char** argv) { return latreg::run_cli(argc, argv); }
