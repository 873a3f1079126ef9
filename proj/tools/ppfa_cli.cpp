#include "ppfa/app/commands.hpp"

#include <iostream>

int main(int argc, char** argv)
{
  return ppfa::app::run_cli(argc, argv, std::cout, std::cerr);
}
