#include "qwem/cli.hpp"

int main(int argc, char** argv) { return qwem::run_cli(argc, argv); }
