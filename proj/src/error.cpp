#include "ilsched/error.hpp"
