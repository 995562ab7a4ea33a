#include <iostream>

#include "semnet/cli.hpp"

int main(int argc, char** argv) {
    return semnet::run_cli(argc, argv, std::cout, std::cerr);
}
