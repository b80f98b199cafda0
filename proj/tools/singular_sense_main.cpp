#include <iostream>
#include <string>
#include <vector>

#include "singular_sense/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return singular_sense::run_cli(args, std::cout, std::cerr);
}
