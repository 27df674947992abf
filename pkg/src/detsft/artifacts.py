"""Plain-text artifacts: one ``# kind key=value ...`` header, body lines, ``# sha256`` trailer."""

import hashlib


class ArtifactError(ValueError):
    pass


def _format(value):
    return repr(value) if isinstance(value, float) else str(value)


def render_artifact(kind, fields, lines):
    head = " ".join([f"# {kind}"] + [f"{k}={_format(v)}" for k, v in fields.items()]) + "\n"
    body = "".join(f"{line}\n" for line in lines)
    digest = hashlib.sha256((head + body).encode()).hexdigest()
    return head + body + f"# sha256 {digest}\n"


def write_artifact(path, kind, fields, lines):
    text = render_artifact(kind, fields, lines)
    with open(path, "w") as fh:
        fh.write(text)
    return text


def read_artifact(path, kind):
    """Return ``(fields, body_lines)`` after checking the kind and the checksum."""
    with open(path) as fh:
        lines = fh.read().splitlines(keepends=True)
    if len(lines) < 2 or not lines[0].startswith(f"# {kind}") or not lines[-1].startswith("# sha256 "):
        raise ArtifactError(f"{path}: not a {kind} artifact")
    head, body = lines[0], "".join(lines[1:-1])
    if hashlib.sha256((head + body).encode()).hexdigest() != lines[-1].split()[2]:
        raise ArtifactError(f"{path}: checksum mismatch")
    parts = head.split()[2:]
    fields = dict(p.split("=", 1) for p in parts)
    return fields, [line.rstrip("\n") for line in lines[1:-1]]
