#include <iostream>
#include <string>
#include <vector>

#include <parafit/cli.hpp>

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return parafit::run_cli(args, std::cout, std::cerr);
}
