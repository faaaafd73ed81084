#include <iostream>
#include <string>
#include <vector>

#include "truncvol/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return truncvol::dispatch(args, std::cout, std::cerr);
}
