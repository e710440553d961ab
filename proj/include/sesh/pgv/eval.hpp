#pragma once

#include <string>
#include <utility>

#include "sesh/pgv/parser.hpp"
#include "sesh/pgv/translate.hpp"
#include "sesh/pgv/typecheck.hpp"

namespace sesh::pgv {

// Typecheck, translate, and run a program. With check=false the priority
// gates are skipped (types and linearity are still enforced) and the
// watchdog catches any deadlock at run time.
inline Value eval(const Term& t, DeadlockPolicy policy = {}, bool check = true) {
  Annotations ann;
  typecheck(t, {}, CheckOptions{check}, &ann);
  Sesh<Value> prog = translate(t, ann, check);
  return run_sesh(std::move(prog), policy);
}

inline Value eval_source(const std::string& source, DeadlockPolicy policy = {},
                         bool check = true) {
  return eval(parse(source), policy, check);
}

}  // namespace sesh::pgv
