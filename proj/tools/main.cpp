#include "kmcli/commands.hpp"

int main(int argc, char** argv) { return kmcli::run_cli(argc, argv); }
