#pragma once

#include "core.hpp"
#include "projq.hpp"
#include "liegrp.hpp"
#include "random.hpp"
#include "group.hpp"
#include "dyn.hpp"
#include "klein.hpp"
