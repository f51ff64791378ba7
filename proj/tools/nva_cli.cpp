#include "nva/cli.hpp"

int main(int argc, char** argv) { return nva::cli_main(argc, argv); }
