#include "permccs/system.hpp"

#include <algorithm>

namespace permccs {

bool PermSet::disjoint(const PermSet& o) const {
  for (auto& p : perms)
    if (o.perms.count(p)) return false;
  return true;
}
bool PermSet::subset_of(const PermSet& o) const {
  for (auto& p : perms)
    if (!o.perms.count(p)) return false;
  return true;
}
PermSet PermSet::unite(const PermSet& o) const {
  PermSet r = *this;
  r.perms.insert(o.perms.begin(), o.perms.end());
  return r;
}
PermSet PermSet::minus(const PermSet& o) const {
  PermSet r;
  for (auto& p : perms)
    if (!o.perms.count(p)) r.perms.insert(p);
  return r;
}
PermSet PermSet::minus_chan(const Name& c) const {
  PermSet r = *this;
  r.perms.erase(perm_in(c));
  r.perms.erase(perm_out(c));
  return r;
}
std::set<Name> PermSet::names() const {
  std::set<Name> s;
  for (auto& p : perms) s.insert(p.chan);
  return s;
}

SysPtr System::mk_leaf(PermSet e, ProcPtr p) {
  auto s = std::make_shared<System>();
  s->kind = Kind::Leaf;
  s->perms = std::move(e);
  s->proc = std::move(p);
  return s;
}
SysPtr System::mk_par(SysPtr a, SysPtr b) {
  if (!owned_perms(a).disjoint(owned_perms(b)))
    throw WellResourcingError("parallel systems are not separate");
  auto s = std::make_shared<System>();
  s->kind = Kind::Par;
  s->left = std::move(a);
  s->right = std::move(b);
  return s;
}
std::optional<SysPtr> System::try_par(SysPtr a, SysPtr b) {
  if (!owned_perms(a).disjoint(owned_perms(b))) return std::nullopt;
  return mk_par(std::move(a), std::move(b));
}
SysPtr System::mk_new(Name c, SysPtr body) {
  auto s = std::make_shared<System>();
  s->kind = Kind::New;
  s->chan = std::move(c);
  s->body = std::move(body);
  return s;
}
SysPtr System::mk_new(const std::vector<Name>& cs, SysPtr body) {
  SysPtr r = std::move(body);
  for (auto it = cs.rbegin(); it != cs.rend(); ++it) r = mk_new(*it, r);
  return r;
}

PermSet owned_perms(const SysPtr& s) {
  switch (s->kind) {
    case System::Kind::Leaf:
      return s->perms;
    case System::Kind::Par:
      return owned_perms(s->left).unite(owned_perms(s->right));
    case System::Kind::New:
      return owned_perms(s->body).minus_chan(s->chan);
  }
  throw std::logic_error("bad system kind");
}

bool separate(const SysPtr& a, const SysPtr& b) {
  return owned_perms(a).disjoint(owned_perms(b));
}

bool well_resourced(const SysPtr& s) {
  switch (s->kind) {
    case System::Kind::Leaf:
      return true;
    case System::Kind::Par:
      return well_resourced(s->left) && well_resourced(s->right) &&
             separate(s->left, s->right);
    case System::Kind::New:
      return well_resourced(s->body);
  }
  return false;
}

ProcPtr erase(const SysPtr& s) {
  switch (s->kind) {
    case System::Kind::Leaf:
      return s->proc;
    case System::Kind::Par:
      return Process::mk_par(erase(s->left), erase(s->right));
    case System::Kind::New:
      return Process::mk_new(s->chan, erase(s->body));
  }
  throw std::logic_error("bad system kind");
}

std::set<Name> free_chans(const SysPtr& s, const DefTable& defs) {
  switch (s->kind) {
    case System::Kind::Leaf: {
      auto r = free_chans(s->proc, defs);
      for (auto& n : s->perms.names()) r.insert(n);
      return r;
    }
    case System::Kind::Par: {
      auto r = free_chans(s->left, defs);
      for (auto& n : free_chans(s->right, defs)) r.insert(n);
      return r;
    }
    case System::Kind::New: {
      auto r = free_chans(s->body, defs);
      r.erase(s->chan);
      return r;
    }
  }
  throw std::logic_error("bad system kind");
}

std::set<Name> free_vars(const SysPtr& s) {
  switch (s->kind) {
    case System::Kind::Leaf:
      return free_vars(s->proc);
    case System::Kind::Par: {
      auto r = free_vars(s->left);
      for (auto& n : free_vars(s->right)) r.insert(n);
      return r;
    }
    case System::Kind::New:
      return free_vars(s->body);
  }
  throw std::logic_error("bad system kind");
}

SysPtr subst_system(const SysPtr& s, const Subst& sigma) {
  if (sigma.empty()) return s;
  switch (s->kind) {
    case System::Kind::Leaf:
      return System::mk_leaf(s->perms, substitute(s->proc, sigma));
    case System::Kind::Par:
      return System::mk_par(subst_system(s->left, sigma),
                            subst_system(s->right, sigma));
    case System::Kind::New:
      return System::mk_new(s->chan, subst_system(s->body, sigma));
  }
  throw std::logic_error("bad system kind");
}

SysPtr rename_system(const SysPtr& s, const Name& from, const Name& to,
                     const DefTable& defs) {
  if (from == to) return s;
  switch (s->kind) {
    case System::Kind::Leaf: {
      PermSet e;
      for (auto& p : s->perms.perms)
        e.insert(Perm{p.pol, p.chan == from ? to : p.chan});
      return System::mk_leaf(std::move(e),
                             rename_channels(s->proc, {{to, from}}, defs));
    }
    case System::Kind::Par:
      return System::mk_par(rename_system(s->left, from, to, defs),
                            rename_system(s->right, from, to, defs));
    case System::Kind::New: {
      if (s->chan == from) return s;  // shadowed
      Name b = s->chan;
      SysPtr body = s->body;
      if (b == to) {
        // binder would capture the new name
        auto taken = free_chans(body, defs);
        taken.insert(from);
        taken.insert(to);
        Name nb = fresh_name(b, taken);
        body = rename_system(body, b, nb, defs);
        b = nb;
      }
      return System::mk_new(b, rename_system(body, from, to, defs));
    }
  }
  throw std::logic_error("bad system kind");
}

int compare(const SysPtr& a, const SysPtr& b) {
  auto ka = static_cast<int>(a->kind), kb = static_cast<int>(b->kind);
  if (ka != kb) return ka < kb ? -1 : 1;
  switch (a->kind) {
    case System::Kind::Leaf: {
      if (int c = compare(a->proc, b->proc)) return c;
      if (a->perms == b->perms) return 0;
      return a->perms < b->perms ? -1 : 1;
    }
    case System::Kind::Par:
      if (int c = compare(a->left, b->left)) return c;
      return compare(a->right, b->right);
    case System::Kind::New: {
      if (a->chan != b->chan) return a->chan < b->chan ? -1 : 1;
      return compare(a->body, b->body);
    }
  }
  return 0;
}

bool equal(const SysPtr& a, const SysPtr& b) { return compare(a, b) == 0; }

}  // namespace permccs
