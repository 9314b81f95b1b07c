#include "cli.hpp"

int main(int argc, char** argv)
{
    return hrc::cli::run(argc, argv);
}
