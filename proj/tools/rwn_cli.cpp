#include <iostream>

#include "rwn/commands.hpp"

int main(int argc, char** argv) {
    return rwn::cli::run(argc, argv, std::cout, std::cerr);
}
