#include "iontrap/cli.hpp"

int main(int argc, char** argv) { return iontrap::cli_main(argc, argv); }
