#include <iostream>
#include <string>
#include <vector>

#include "pfscale/cli/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return pfscale::cli::run_cli(args, std::cout, std::cerr);
}
