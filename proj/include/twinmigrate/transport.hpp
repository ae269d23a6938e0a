#pragma once

#include <cstdint>
#include <functional>
#include <memory>

#include "twinmigrate/protocol.hpp"

namespace twinmigrate {

// Serves one session over stdin/stdout until close or end of input.
void serve_stdio(Session& session);

// Listens on 127.0.0.1:port (0 picks a free port) and serves connections one
// at a time, each with a fresh session from `make_session`. `on_listening`
// receives the bound port. Returns after `max_connections` clients when it is
// non-zero, otherwise runs until the process is stopped.
void serve_tcp(std::uint16_t port, const std::function<std::unique_ptr<Session>()>& make_session,
               const std::function<void(std::uint16_t)>& on_listening = {},
               std::size_t max_connections = 0);

}  // namespace twinmigrate
