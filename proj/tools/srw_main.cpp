#include <iostream>

#include "srw/cli.hpp"

int main(int argc, char** argv) { return srw::dispatch(argc, argv, std::cout, std::cerr); }
