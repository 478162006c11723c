#include "hypstab/cli.hpp"

int main(int argc, char** argv) { return hypstab::run_cli(argc, argv); }
