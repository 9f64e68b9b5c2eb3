#include <iostream>

#include "bnmiss/cli.hpp"

int main(int argc, char** argv) { return bnmiss::dispatch(argc, argv, std::cout, std::cerr); }
