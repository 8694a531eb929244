#include "support.hpp"
#include <catch2/catch_amalgamated.hpp>
