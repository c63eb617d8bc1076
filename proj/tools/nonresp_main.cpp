#include <vector>
#include <string>

#include "nonresp/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return nonresp::cli::run_cli(args);
}
