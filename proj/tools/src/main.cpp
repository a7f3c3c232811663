#include <iostream>

#include "berry/cli/dispatch.hpp"

int main(int argc, char** argv) { return berry::cli::dispatch(argc, argv, std::cout, std::cerr); }
