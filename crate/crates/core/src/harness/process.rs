//! Child-process execution with a hard deadline.
//!
//! Commands run through `sh -c` in a scrubbed environment (PATH plus an
//! explicit allow-list). Exit 0 is a pass, any other exit is a fail, and a
//! process still running at its deadline is killed and reported as a
//! timeout. Spawn-level problems are exec errors, distinct from test
//! failures.

use std::io::Read;
use std::path::Path;
use std::process::{Child, Command, Stdio};
use std::time::{Duration, Instant};

use super::{RunOutcome, RunStatus};

const POLL_INTERVAL: Duration = Duration::from_millis(5);

/// Kill the child's entire process group: the shell's own children (the
/// actual test processes) hold the output pipes and must die with it, or a
/// divergent test keeps running (and keeps the workspace copy hostage)
/// after its deadline.
fn kill_tree(child: &mut Child) {
    #[cfg(unix)]
    unsafe {
        libc::kill(-(child.id() as i32), libc::SIGKILL);
    }
    let _ = child.kill();
    let _ = child.wait();
}

pub(crate) struct ExecRequest<'a> {
    pub command: String,
    pub workdir: &'a Path,
    pub limit: Duration,
    pub env_allowlist: &'a [String],
    pub capture_limit: usize,
}

fn spawn_reader(
    stream: Option<impl Read + Send + 'static>,
    cap: usize,
) -> std::thread::JoinHandle<Vec<u8>> {
    std::thread::spawn(move || {
        let mut collected = Vec::new();
        if let Some(mut stream) = stream {
            let mut buf = [0u8; 4096];
            loop {
                match stream.read(&mut buf) {
                    Ok(0) | Err(_) => break,
                    Ok(n) => {
                        if collected.len() < cap {
                            let take = n.min(cap - collected.len());
                            collected.extend_from_slice(&buf[..take]);
                        }
                        // keep draining past the cap so the child never
                        // blocks on a full pipe
                    }
                }
            }
        }
        collected
    })
}

pub(crate) fn run_with_deadline(req: ExecRequest<'_>) -> RunOutcome {
    let started = Instant::now();
    let mut cmd = Command::new("sh");
    cmd.arg("-c")
        .arg(&req.command)
        .current_dir(req.workdir)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .env_clear();
    #[cfg(unix)]
    {
        use std::os::unix::process::CommandExt;
        cmd.process_group(0);
    }
    for key in ["PATH", "HOME"].iter().map(|s| s.to_string()).chain(req.env_allowlist.iter().cloned()) {
        if let Ok(value) = std::env::var(&key) {
            cmd.env(&key, value);
        }
    }

    let mut child = match cmd.spawn() {
        Ok(child) => child,
        Err(e) => {
            return RunOutcome {
                status: RunStatus::ExecError,
                duration: started.elapsed().as_secs_f64(),
                detail: format!("spawn failed: {e}"),
            }
        }
    };

    let stdout = spawn_reader(child.stdout.take(), req.capture_limit);
    let stderr = spawn_reader(child.stderr.take(), req.capture_limit);

    // duration is measured at the observation point, not after stream
    // drains, so Timeout ⟺ duration ≥ limit holds in the report
    let (status, duration) = loop {
        if started.elapsed() >= req.limit {
            kill_tree(&mut child);
            break (None, started.elapsed().as_secs_f64().max(req.limit.as_secs_f64()));
        }
        match child.try_wait() {
            Ok(Some(status)) => break (Some(status), started.elapsed().as_secs_f64()),
            Ok(None) => std::thread::sleep(POLL_INTERVAL),
            Err(e) => {
                kill_tree(&mut child);
                return RunOutcome {
                    status: RunStatus::ExecError,
                    duration: started.elapsed().as_secs_f64(),
                    detail: format!("wait failed: {e}"),
                };
            }
        }
    };

    let mut detail_bytes = stdout.join().unwrap_or_default();
    detail_bytes.extend_from_slice(&stderr.join().unwrap_or_default());
    detail_bytes.truncate(req.capture_limit);
    let detail = String::from_utf8_lossy(&detail_bytes).into_owned();

    match status {
        None => RunOutcome {
            status: RunStatus::Timeout,
            duration,
            detail,
        },
        Some(status) if status.success() => RunOutcome {
            status: RunStatus::Pass,
            duration,
            detail,
        },
        Some(_) => RunOutcome {
            status: RunStatus::Fail,
            duration,
            detail,
        },
    }
}
