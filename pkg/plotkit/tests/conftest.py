import math

import pytest

HEADER = ("iter,f,grad_norm_l2,local_grad_norm,stepsize,theta,"
          "backtracks,hessian_shift,elapsed_seconds")


def write_trace(path, f_values, stepsizes=None, grad_norms=None):
    """Synthesize a schema-conformant trace CSV.

    The last row gets stepsize nan, matching how bench records the final
    iterate. Floats are written with repr like the real writer.
    """
    n = len(f_values)
    if stepsizes is None:
        stepsizes = [1.0] * (n - 1)
    if grad_norms is None:
        grad_norms = [10.0 ** -k for k in range(n)]
    rows = []
    for i in range(n):
        alpha = stepsizes[i] if i < n - 1 else math.nan
        rows.append(f"{i},{float(f_values[i])!r},{float(grad_norms[i])!r},"
                    f"{float(grad_norms[i])!r},{float(alpha)!r},{math.nan!r},"
                    f"0,{0.0!r},{0.001 * i!r}")
    path.write_text(HEADER + "\n" + "\n".join(rows) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def trace_file(tmp_path):
    return write_trace(tmp_path / "run.csv", [4.0, 1.0, 0.25, 0.0625])
