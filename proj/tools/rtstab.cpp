#include "rtstab_app.hpp"

int main(int argc, char** argv) { return rtstab::app::run(argc, argv); }
