#pragma once

// Permission-confined systems: <E>{P} leaves composed with | and new.
// Public constructors enforce well-resourcing; everything produced by the
// reduction rules stays well-resourced.

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "permccs/ast.hpp"

namespace permccs {

enum class Polarity { In, Out };  // c? / c!

struct Perm {
  Polarity pol;
  Name chan;

  bool operator<(const Perm& o) const {
    if (chan != o.chan) return chan < o.chan;
    return static_cast<int>(pol) < static_cast<int>(o.pol);
  }
  bool operator==(const Perm& o) const {
    return pol == o.pol && chan == o.chan;
  }
};

inline Perm perm_in(Name c) { return Perm{Polarity::In, std::move(c)}; }
inline Perm perm_out(Name c) { return Perm{Polarity::Out, std::move(c)}; }

struct PermSet {
  std::set<Perm> perms;

  PermSet() = default;
  PermSet(std::initializer_list<Perm> ps) : perms(ps) {}

  bool contains(const Perm& p) const { return perms.count(p) != 0; }
  bool empty() const { return perms.empty(); }
  size_t size() const { return perms.size(); }
  void insert(const Perm& p) { perms.insert(p); }
  void erase(const Perm& p) { perms.erase(p); }

  bool disjoint(const PermSet& o) const;
  bool subset_of(const PermSet& o) const;
  PermSet unite(const PermSet& o) const;
  PermSet minus(const PermSet& o) const;
  PermSet minus_chan(const Name& c) const;  // drop c? and c!
  std::set<Name> names() const;

  bool operator==(const PermSet& o) const { return perms == o.perms; }
  bool operator<(const PermSet& o) const { return perms < o.perms; }
};

class WellResourcingError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct System;
using SysPtr = std::shared_ptr<const System>;

struct System {
  enum class Kind { Leaf, Par, New };

  Kind kind;
  PermSet perms;  // Leaf
  ProcPtr proc;   // Leaf
  SysPtr left, right;
  Name chan;     // New
  SysPtr body;   // New

  // throws WellResourcingError when the children are not separate
  static SysPtr mk_leaf(PermSet e, ProcPtr p);
  static SysPtr mk_par(SysPtr a, SysPtr b);
  static SysPtr mk_new(Name c, SysPtr s);
  static SysPtr mk_new(const std::vector<Name>& cs, SysPtr s);

  // non-throwing variant used by generators
  static std::optional<SysPtr> try_par(SysPtr a, SysPtr b);
};

// Def. of (visibly) owned permissions: leaf set, union over |, minus the
// restricted channel's pair under new.
PermSet owned_perms(const SysPtr& s);

bool separate(const SysPtr& a, const SysPtr& b);

// Structural well-resourcing check (constructors enforce it already; the
// explicit predicate exists for the metatheory suites).
bool well_resourced(const SysPtr& s);

// Erasure |S|: strip the permission sets homomorphically.
ProcPtr erase(const SysPtr& s);

// Free names of a system: process free channels plus the names occurring
// in permission sets, minus restrictions.
std::set<Name> free_chans(const SysPtr& s, const DefTable& defs);

std::set<Name> free_vars(const SysPtr& s);

SysPtr subst_system(const SysPtr& s, const Subst& sigma);
SysPtr rename_system(const SysPtr& s, const Name& from, const Name& to,
                     const DefTable& defs);

int compare(const SysPtr& a, const SysPtr& b);
bool equal(const SysPtr& a, const SysPtr& b);

}  // namespace permccs
