#include "fsk/commands.hpp"

#include <iostream>

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return fsk::run(args, std::cout, std::cerr);
}
