#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>

#include <json.hpp>

#include "srw/agents.hpp"
#include "srw/fragment.hpp"

namespace httplib {
class Server;
}

namespace srw {

struct ServiceResponse {
  int status = 200;
  nlohmann::json body;
};

/// In-memory session registry behind the HTTP endpoints. Every method is
/// safe to call concurrently; mutations on one session are serialized.
class SessionService {
 public:
  /// Relative paths in create requests resolve against base_dir.
  explicit SessionService(std::string base_dir = ".");

  ServiceResponse create_session(const nlohmann::json& body);
  ServiceResponse network(const std::string& id);
  ServiceResponse beliefs(const std::string& id);
  ServiceResponse post_utterance(const std::string& id, const nlohmann::json& body);
  ServiceResponse post_evidence(const std::string& id, const nlohmann::json& body);
  ServiceResponse delete_evidence(const std::string& id, const std::string& node);
  ServiceResponse implied(const std::string& id, std::optional<double> threshold);
  ServiceResponse events(const std::string& id, std::uint64_t from);
  ServiceResponse export_spec(const std::string& id, const nlohmann::json& body);

 private:
  struct Entry {
    std::mutex mu;
    std::string id;
    std::string created_at;
    Fragment fragment;
    std::unique_ptr<Session> session;
  };

  std::shared_ptr<Entry> find(const std::string& id);
  // Runs fn under the session's lock; unknown ids give 404, domain errors
  // map to their HTTP status.
  template <class F>
  ServiceResponse locked(const std::string& id, F&& fn);
  std::string resolve(const std::string& path) const;

  std::string base_dir_;
  std::shared_mutex registry_mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::atomic<std::uint64_t> counter_{0};
};

/// Registers every endpoint on the server.
void mount_routes(httplib::Server& server, SessionService& service);

/// Blocks serving on host:port. Returns false if the socket cannot be bound.
bool serve(const std::string& host, int port, const std::string& base_dir = ".");

/// Plain-text specification document for the session's implied set.
std::string render_specification(const std::string& session_id, const Fragment& fragment, const Session& session,
                                  double threshold, const std::set<NodeId>& discarded);

}  // namespace srw
