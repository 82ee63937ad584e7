#include <iostream>

#include "dbnmf/cli.hpp"

int main(int argc, char** argv)
{
    return dbnmf::run_command(argc, argv, std::cout, std::cerr);
}
