#include "ccrm/cli.hpp"

int main(int argc, char **argv) { return ccrm::cli::run_cli(argc, argv); }
