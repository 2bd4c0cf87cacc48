#include <iostream>

#include "hyperrate/cli.hpp"

int main(int argc, char** argv) { return hyperrate::run(argc, argv, std::cout, std::cerr); }
