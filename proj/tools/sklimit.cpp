#include "sklimit/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return sklimit::dispatch(argc, argv, std::cout, std::cerr); }
