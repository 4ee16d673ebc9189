#include "commands.hpp"

int main(int argc, char** argv) { return statecap::cli::run_cli(argc, argv); }
