#include <iostream>
#include <string>
#include <vector>

#include "rmprod/cli/command_line.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return rmprod::cli::run_cli(args, std::cout, std::cerr);
}
