// Writes the synthetic example inputs and run configurations into a directory.
//   make_example_data [dir]

#include <iostream>

#include "hemsflex/pipeline.hpp"

int main(int argc, char** argv)
{
    const std::filesystem::path dir = argc > 1 ? argv[1] : "data";
    return hemsflex::run_command(
        [&] {
            hemsflex::write_example_inputs(dir);
            std::cout << "wrote example inputs to " << dir.string() << '\n';
        },
        std::cerr);
}
