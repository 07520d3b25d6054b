#include "mapf/cli.hpp"

int main(int argc, char** argv) { return mapf::cli::dispatch(argc, argv); }
