#include "cli.hpp"

int main(int argc, char** argv) { return levygibbs::cli::run_cli(argc, argv); }
