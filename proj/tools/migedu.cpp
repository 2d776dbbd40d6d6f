#include "migedu/cli.hpp"

#include <iostream>

int main(int argc, char **argv) { return migedu::run(argc, argv, std::cout, std::cerr); }
