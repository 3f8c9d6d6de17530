#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>

#include "probthread/meadow.hpp"

namespace probthread {

class Service;

/// Behaviour of a service state. Implementations must be immutable: derive()
/// returns the successor service rather than mutating.
class ServiceBehavior {
 public:
  virtual ~ServiceBehavior() = default;
  /// The probability of reply True, or nullopt if the method cannot be
  /// processed.
  virtual std::optional<Probability> reply(std::string_view method) const = 0;
  virtual Service derive(std::string_view method) const = 0;
  /// Identifies the state; equal keys mean equal services.
  virtual std::string key() const = 0;
};

/// A service value. The default-constructed service is the empty service,
/// which processes no method and derives to itself.
class Service {
 public:
  Service() = default;
  explicit Service(std::shared_ptr<const ServiceBehavior> behavior) : behavior_(std::move(behavior)) {}

  static Service empty() { return Service(); }

  bool is_empty() const { return !behavior_; }
  std::optional<Probability> reply(std::string_view method) const;
  Service derive(std::string_view method) const;
  std::string key() const;

  friend bool operator==(const Service& a, const Service& b) { return a.key() == b.key(); }

 private:
  std::shared_ptr<const ServiceBehavior> behavior_;
};

/// The random Boolean generator: get(p) replies True with probability p and
/// leaves the service unchanged; every other method is refused.
Service make_random();

/// A fully deterministic Boolean register with methods set:true, set:false
/// and get.
Service make_register(bool initial);

/// Method name get(p) as understood by the random service.
std::string random_get_method(const Probability& p);

/// Checks that for every probe method, reply is absent iff derive yields the
/// empty service. Returns the first offending method, if any.
std::optional<std::string> conformance_violation(const Service& service, std::span<const std::string> probes);

/// Named services; at most one per focus.
class ServiceFamily {
 public:
  ServiceFamily() = default;

  static ServiceFamily empty() { return {}; }
  static ServiceFamily singleton(std::string focus, Service service);

  /// Union of both families; a focus present in both collapses to the empty
  /// service.
  ServiceFamily compose(const ServiceFamily& other) const;
  /// Drops every service whose focus is in `foci`.
  ServiceFamily encapsulate(const std::set<std::string>& foci) const;

  const Service* find(const std::string& focus) const;
  ServiceFamily with(const std::string& focus, Service service) const;

  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, Service>& entries() const { return entries_; }

  /// Deterministic state identity, used to key product constructions.
  std::string key() const;
  std::string to_string() const;

  friend bool operator==(const ServiceFamily&, const ServiceFamily&) = default;

 private:
  std::map<std::string, Service> entries_;
};

inline ServiceFamily empty_family() { return ServiceFamily::empty(); }
inline ServiceFamily singleton(std::string focus, Service service) {
  return ServiceFamily::singleton(std::move(focus), std::move(service));
}
inline ServiceFamily compose(const ServiceFamily& u, const ServiceFamily& v) { return u.compose(v); }
inline ServiceFamily encapsulate(const std::set<std::string>& foci, const ServiceFamily& u) {
  return u.encapsulate(foci);
}

/// Factories for the family literal syntax `{random: Random, r1: Register(true)}`.
/// Registration runs the conformance check on a freshly built service over the
/// supplied probe methods and throws Error on violation.
class ServiceRegistry {
 public:
  using Factory = std::function<Service(std::string_view argument)>;

  /// Holds Random, Register and Empty.
  static ServiceRegistry with_builtins();

  void add(std::string name, Factory factory, std::string_view sample_argument,
           std::span<const std::string> probes);

  Service make(const std::string& name, std::string_view argument) const;

  /// Parses a family literal. Throws ParseError.
  ServiceFamily parse_family(std::string_view text) const;

 private:
  std::map<std::string, Factory> factories_;
};

}  // namespace probthread
