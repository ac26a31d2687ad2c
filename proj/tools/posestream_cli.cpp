#include <iostream>

#include "posestream/cli.hpp"

int main(int argc, char** argv) { return posestream::run_cli(argc, argv, std::cout, std::cerr); }
