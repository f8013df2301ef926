#include <platsim/runner.hpp>

int main(int argc, char** argv) {
    return platsim::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
