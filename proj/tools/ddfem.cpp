#include "ddfem/cli.hpp"

int main(int argc, char** argv) { return ddfem::run_cli(argc, argv); }
