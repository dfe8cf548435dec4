#include "choquard/cli.hpp"

int main(int argc, char** argv) { return choquard::cli_main(argc, argv); }
