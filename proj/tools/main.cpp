#include "coagstat/cli.hpp"

int main(int argc, char** argv) { return coagstat::cli_main(argc, argv); }
