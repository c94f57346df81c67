#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace luxloop::fleet {

// Minimal RAII wrapper over a connected TCP socket with buffered line reads.
class TcpStream {
 public:
  TcpStream() = default;
  explicit TcpStream(int fd) : fd_(fd) {}
  ~TcpStream();

  TcpStream(TcpStream&& other) noexcept;
  TcpStream& operator=(TcpStream&& other) noexcept;
  TcpStream(const TcpStream&) = delete;
  TcpStream& operator=(const TcpStream&) = delete;

  bool valid() const { return fd_ >= 0; }
  int fd() const { return fd_; }

  // Sends the whole buffer; false on any error.
  bool write_all(std::string_view data);

  // Blocks until one '\n'-terminated line (returned without the newline) or
  // EOF/error (nullopt).
  std::optional<std::string> read_line();

  void shutdown_both();
  void close();

  static std::optional<TcpStream> connect(const std::string& host, int port);

 private:
  int fd_ = -1;
  std::string buffer_;
};

class TcpListener {
 public:
  TcpListener() = default;
  ~TcpListener();

  TcpListener(TcpListener&& other) noexcept;
  TcpListener& operator=(TcpListener&& other) noexcept;
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  bool valid() const { return fd_ >= 0; }
  int port() const { return port_; }

  std::optional<TcpStream> accept();
  void close();  // also unblocks a pending accept

  // port 0 binds an ephemeral port; the chosen one is reported by port().
  static std::optional<TcpListener> bind(const std::string& host, int port);

 private:
  int fd_ = -1;
  int port_ = 0;
};

}  // namespace luxloop::fleet
