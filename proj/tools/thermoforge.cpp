#include <iostream>

#include "thermoforge/cli.hpp"

int main(int argc, char** argv) { return thermoforge::run_cli(argc, argv, std::cout, std::cerr); }
