// Sparse SDPA format. Our primal (min <C,X> s.t. <A_i,X> = b_i) is SDPA's
// dual form, so F_i = A_i, F_0 = -C and SDPA's c vector holds b.

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ergobound/sdp.hpp"

namespace ergobound {

namespace {

std::string Fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void WriteSdpa(const SdpProblem& problem, std::ostream& out) {
  problem.Validate();
  const int nb = static_cast<int>(problem.block_sizes.size());
  const int m = problem.num_constraints();
  const bool has_free = problem.num_free > 0;
  out << "\"ergobound SDP: min <C,X> + c.u s.t. <A_i,X> + a_i.u = b_i\"\n";
  if (has_free) out << "*free " << nb + 1 << "\n";
  out << m << "\n" << nb + (has_free ? 1 : 0) << "\n";
  for (int b = 0; b < nb; ++b) out << (b ? " " : "") << problem.block_sizes[b];
  if (has_free) out << " " << -problem.num_free;
  out << "\n";
  for (int i = 0; i < m; ++i) out << (i ? " " : "") << Fmt(problem.constraints[i].rhs);
  out << "\n";
  for (int b = 0; b < nb; ++b) {
    for (const auto& e : problem.block_objective[b]) {
      out << "0 " << b + 1 << " " << e.row + 1 << " " << e.col + 1 << " " << Fmt(-e.value)
          << "\n";
    }
  }
  for (int k = 0; k < problem.num_free; ++k) {
    if (problem.free_objective[k] != 0.0) {
      out << "0 " << nb + 1 << " " << k + 1 << " " << k + 1 << " "
          << Fmt(-problem.free_objective[k]) << "\n";
    }
  }
  for (int i = 0; i < m; ++i) {
    const auto& con = problem.constraints[i];
    for (int b = 0; b < nb; ++b) {
      for (const auto& e : con.blocks[b]) {
        out << i + 1 << " " << b + 1 << " " << e.row + 1 << " " << e.col + 1 << " "
            << Fmt(e.value) << "\n";
      }
    }
    for (const auto& [k, v] : con.free) {
      out << i + 1 << " " << nb + 1 << " " << k + 1 << " " << k + 1 << " " << Fmt(v) << "\n";
    }
  }
}

SdpProblem ReadSdpa(std::istream& in) {
  std::string line;
  int free_block = -1;  // 1-based index of the free-variable block, if any
  std::string body;
  // Comments may only precede the numeric data.
  while (std::getline(in, line)) {
    if (!line.empty() && (line[0] == '"' || line[0] == '*')) {
      if (line.rfind("*free", 0) == 0) {
        std::istringstream ls(line.substr(5));
        if (!(ls >> free_block)) throw std::runtime_error("ReadSdpa: malformed *free line");
      }
      continue;
    }
    for (char& c : line) {
      if (c == ',' || c == '{' || c == '}' || c == '(' || c == ')') c = ' ';
    }
    body += line + "\n";
  }
  std::istringstream data(body);
  int m = 0, nblocks = 0;
  if (!(data >> m >> nblocks) || m < 0 || nblocks < 1) {
    throw std::runtime_error("ReadSdpa: bad header");
  }
  std::vector<int> sizes(nblocks);
  for (int& s : sizes) {
    if (!(data >> s) || s == 0) throw std::runtime_error("ReadSdpa: bad block structure");
  }
  std::vector<double> rhs(m);
  for (double& v : rhs) {
    if (!(data >> v)) throw std::runtime_error("ReadSdpa: bad objective vector");
  }

  SdpProblem p;
  // Map SDPA blocks to our blocks; the announced free block becomes u.
  std::vector<int> our_block(nblocks, -1);
  for (int b = 0; b < nblocks; ++b) {
    if (b + 1 == free_block) {
      if (sizes[b] > 0) throw std::runtime_error("ReadSdpa: free block must be diagonal");
      p.num_free = -sizes[b];
      continue;
    }
    our_block[b] = static_cast<int>(p.block_sizes.size());
    p.block_sizes.push_back(sizes[b] > 0 ? sizes[b] : -sizes[b]);
  }
  const int nb = static_cast<int>(p.block_sizes.size());
  p.free_objective.assign(p.num_free, 0.0);
  p.block_objective.assign(nb, {});
  p.constraints.resize(m);
  for (int i = 0; i < m; ++i) {
    p.constraints[i].blocks.assign(nb, {});
    p.constraints[i].rhs = rhs[i];
  }
  int k = 0, blk = 0, r = 0, c = 0;
  double v = 0.0;
  while (data >> k >> blk >> r >> c >> v) {
    if (k < 0 || k > m || blk < 1 || blk > nblocks) {
      throw std::runtime_error("ReadSdpa: entry index out of range");
    }
    const int b = blk - 1;
    if (r > c) std::swap(r, c);
    if (b + 1 == free_block) {
      if (r != c || r < 1 || r > p.num_free) {
        throw std::runtime_error("ReadSdpa: bad free-variable entry");
      }
      if (k == 0) {
        p.free_objective[r - 1] -= v;
      } else {
        p.constraints[k - 1].free.emplace_back(r - 1, v);
      }
      continue;
    }
    if (sizes[b] < 0 && r != c) throw std::runtime_error("ReadSdpa: off-diagonal in LP block");
    const SymEntry e{r - 1, c - 1, k == 0 ? -v : v};
    if (k == 0) {
      p.block_objective[our_block[b]].push_back(e);
    } else {
      p.constraints[k - 1].blocks[our_block[b]].push_back(e);
    }
  }
  if (!data.eof()) throw std::runtime_error("ReadSdpa: malformed entry line");
  p.Validate();
  return p;
}

}  // namespace ergobound
