#include <iostream>
#include <string>
#include <vector>

#include "stereocrawl/cli.hpp"

int main(int argc, char** argv) {
    stereocrawl::cli::install_interrupt_handler();
    std::vector<std::string> args(argv + 1, argv + argc);
    return stereocrawl::cli::run(args, std::cout, std::cerr);
}
