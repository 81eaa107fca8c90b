#include <iostream>
#include <string>
#include <vector>

#include "trapdet/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return trapdet::cli::run(std::move(args), std::cout, std::cerr);
}
