#include "edgecov/core.hpp"

// Header-only; this translation unit just anchors the module in the library.
