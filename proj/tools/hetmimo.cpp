#include "hetmimo/cli.hpp"

int main(int argc, char** argv) { return hetmimo::run_cli(argc, argv); }
