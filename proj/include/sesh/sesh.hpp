#pragma once

#include "sesh/graded.hpp"
#include "sesh/oneshot.hpp"
#include "sesh/pgv/eval.hpp"
#include "sesh/pgv/graph.hpp"
#include "sesh/priority.hpp"
#include "sesh/runtime.hpp"
#include "sesh/session.hpp"
