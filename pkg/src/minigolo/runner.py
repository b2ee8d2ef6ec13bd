"""Run engine code on a thread with a deep Python stack.

Both engines recurse on the host stack once per guest call, so deep guest
recursion needs a raised recursion limit and a thread whose C stack can
hold it.
"""

import sys
import threading

STACK_BYTES = 1024 * 1024 * 1024
FRAMES_PER_CALL = 8


def run_deep(fn, *args, max_call_depth=100000):
    """Call ``fn(*args)`` on a big-stack thread; return its result or re-raise."""
    result = {}

    def body():
        try:
            result["value"] = fn(*args)
        except BaseException as exc:  # re-raised on the calling thread
            result["error"] = exc

    old_limit = sys.getrecursionlimit()
    old_size = threading.stack_size()
    sys.setrecursionlimit(max(old_limit, max_call_depth * FRAMES_PER_CALL + 10000))
    threading.stack_size(STACK_BYTES)
    try:
        t = threading.Thread(target=body, name="minigolo-engine")
        t.start()
        t.join()
    finally:
        threading.stack_size(old_size)
        sys.setrecursionlimit(old_limit)
    if "error" in result:
        raise result["error"]
    return result["value"]


def format_trace(exc, limit=40):
    """The ``error: ...`` headline plus ``  at`` lines, elided in the middle when long."""
    lines = [exc.headline()]
    trace = exc.trace
    if len(trace) <= limit:
        lines.extend(trace)
    else:
        half = limit // 2
        lines.extend(trace[:half])
        lines.append(f"  ... {len(trace) - 2 * half} more frames")
        lines.extend(trace[-half:])
    return "\n".join(lines)
