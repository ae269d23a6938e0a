#include "twinmigrate/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <iostream>
#include <stdexcept>
#include <string>

namespace twinmigrate {

namespace {

class Fd {
 public:
  explicit Fd(int fd) : fd_(fd) {}
  ~Fd() {
    if (fd_ >= 0) ::close(fd_);
  }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  int get() const { return fd_; }

 private:
  int fd_;
};

[[noreturn]] void fail(const std::string& what) {
  throw std::runtime_error(what + ": " + std::strerror(errno));
}

bool write_all(int fd, const std::string& data) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t k = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (k < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    sent += static_cast<std::size_t>(k);
  }
  return true;
}

void serve_connection(int fd, Session& session) {
  std::string buffer;
  char chunk[4096];
  while (!session.closed()) {
    const ssize_t k = ::recv(fd, chunk, sizeof chunk, 0);
    if (k < 0 && errno == EINTR) continue;
    if (k <= 0) return;
    buffer.append(chunk, static_cast<std::size_t>(k));
    std::size_t newline;
    while (!session.closed() && (newline = buffer.find('\n')) != std::string::npos) {
      std::string line = buffer.substr(0, newline);
      buffer.erase(0, newline + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      if (!write_all(fd, session.handle(line) + "\n")) return;
    }
  }
}

}  // namespace

void serve_stdio(Session& session) {
  std::ios::sync_with_stdio(false);
  serve_stream(std::cin, std::cout, session);
}

void serve_tcp(std::uint16_t port, const std::function<std::unique_ptr<Session>()>& make_session,
               const std::function<void(std::uint16_t)>& on_listening,
               std::size_t max_connections) {
  const Fd listener(::socket(AF_INET, SOCK_STREAM, 0));
  if (listener.get() < 0) fail("socket");
  const int yes = 1;
  ::setsockopt(listener.get(), SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(listener.get(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) fail("bind");
  if (::listen(listener.get(), 4) < 0) fail("listen");

  socklen_t len = sizeof addr;
  if (::getsockname(listener.get(), reinterpret_cast<sockaddr*>(&addr), &len) < 0)
    fail("getsockname");
  if (on_listening) on_listening(ntohs(addr.sin_port));

  for (std::size_t served = 0; max_connections == 0 || served < max_connections;) {
    const int client = ::accept(listener.get(), nullptr, nullptr);
    if (client < 0) {
      if (errno == EINTR) continue;
      fail("accept");
    }
    const Fd guard(client);
    const std::unique_ptr<Session> session = make_session();
    serve_connection(client, *session);
    ++served;
  }
}

}  // namespace twinmigrate
