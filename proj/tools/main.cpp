#include "panelcast/app.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return panelcast::app::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
