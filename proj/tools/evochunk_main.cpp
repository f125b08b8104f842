#include "evochunk/cli.hpp"

int main(int argc, char** argv) { return evochunk::run_cli(argc, argv); }
