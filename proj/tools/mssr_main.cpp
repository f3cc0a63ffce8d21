#include <iostream>

#include "mssr/cli.hpp"

int main(int argc, char** argv) {
    return mssr::run_cli(argc, argv, std::cout, std::cerr);
}
