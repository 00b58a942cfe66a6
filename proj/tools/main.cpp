#include "survitr/cli_driver.hpp"

int main(int argc, char** argv) { return survitr::cli::run(argc, argv); }
