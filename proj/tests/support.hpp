#pragma once

#include "perfectoid/sampling.hpp"

namespace testsupport {

using namespace perfectoid;
using namespace perfectoid::sampling;

}  // namespace testsupport
