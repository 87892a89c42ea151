// Catch2 v3 amalgamated translation unit (ships its own main).
#include <catch2/catch_amalgamated.cpp>
