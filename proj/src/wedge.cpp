#include "modloc/types.hpp"
