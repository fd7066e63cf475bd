#include "pilotrt/stager.hpp"

#include <filesystem>

#include "pilotrt/errors.hpp"

namespace fs = std::filesystem;

namespace pilotrt {

namespace {

fs::path resolve(const std::string& p, const std::string& base) {
  fs::path path(p);
  if (path.is_absolute() || base.empty()) return path;
  return fs::path(base) / path;
}

}  // namespace

void run_directive(const StagingDirective& d, const std::string& sandbox,
                   bool stage_in) {
  // Stage-in sources come from outside the sandbox; everything else that is
  // relative lives inside it.
  fs::path src = stage_in ? resolve(d.source, "") : resolve(d.source, sandbox);
  fs::path dst = resolve(d.target, sandbox);
  std::error_code ec;
  if (dst.has_parent_path()) fs::create_directories(dst.parent_path(), ec);
  ec.clear();
  switch (d.mode) {
    case StageMode::Copy:
      fs::copy_file(src, dst, fs::copy_options::overwrite_existing, ec);
      break;
    case StageMode::Link:
      fs::remove(dst, ec);
      ec.clear();
      fs::create_symlink(fs::absolute(src), dst, ec);
      break;
    case StageMode::Move:
      fs::rename(src, dst, ec);
      if (ec) {
        // Cross-device move: copy then remove.
        ec.clear();
        fs::copy_file(src, dst, fs::copy_options::overwrite_existing, ec);
        if (!ec) fs::remove(src, ec);
      }
      break;
  }
  if (ec) throw StagingFailure(d.source, ec.message());
}

StagerPool::StagerPool(Side side, int instances, std::string sandbox_root,
                       BoundedQueue<Unit>& in, Hooks hooks,
                       Profiler* profiler, std::string component_prefix)
    : side_(side),
      instances_n_(instances),
      sandbox_root_(std::move(sandbox_root)),
      in_(in),
      hooks_(std::move(hooks)),
      profiler_(profiler),
      prefix_(std::move(component_prefix)) {}

void StagerPool::start() {
  for (int i = 0; i < instances_n_; ++i)
    threads_.emplace_back([this, i] { instance_loop(i); });
}

void StagerPool::instance_loop(int instance) {
  const std::string comp = prefix_ + "." + std::to_string(instance);
  while (auto unit = in_.pop()) {
    Unit u = std::move(*unit);
    if (profiler_) profiler_->record(u.uid, comp, "get");
    try {
      if (side_ == Side::In)
        stage_in(u, comp);
      else
        stage_out(u, comp);
    } catch (const StagingFailure& e) {
      advance(u, UnitState::FAILED, profiler_, comp, e.what());
      if (hooks_.finalize) hooks_.finalize(std::move(u));
      continue;
    }
    hooks_.forward(std::move(u));
  }
}

void StagerPool::stage_in(Unit& u, const std::string& comp) {
  const auto& dirs = u.description.input_staging;
  if (dirs.empty()) {
    // Skip the staging state outright: no synthetic events, no filesystem
    // operations. The executor creates the sandbox lazily.
    advance(u, UnitState::A_SCHEDULING, profiler_, comp);
    return;
  }
  if (u.sandbox.empty()) u.sandbox = sandbox_root_ + "/" + u.uid;
  std::error_code ec;
  std::filesystem::create_directories(u.sandbox, ec);
  if (ec) throw StagingFailure(u.sandbox, ec.message());
  advance(u, UnitState::A_STAGING_IN, profiler_, comp);
  for (const auto& d : dirs) {
    run_directive(d, u.sandbox, true);
    if (profiler_) profiler_->record(u.uid, comp, "stage_in", d.target);
  }
  advance(u, UnitState::A_SCHEDULING, profiler_, comp);
}

void StagerPool::stage_out(Unit& u, const std::string& comp) {
  const auto& dirs = u.description.output_staging;
  if (dirs.empty()) {
    advance(u, UnitState::DONE, profiler_, comp);
    return;
  }
  advance(u, UnitState::A_STAGING_OUT, profiler_, comp);
  for (const auto& d : dirs) {
    run_directive(d, u.sandbox, false);
    if (profiler_) profiler_->record(u.uid, comp, "stage_out", d.target);
  }
  advance(u, UnitState::DONE, profiler_, comp);
}

void StagerPool::join() {
  for (auto& t : threads_)
    if (t.joinable()) t.join();
}

}  // namespace pilotrt
