"""Self-signed TLS certificate provisioning, bound to the server's IP address.

Old mobile browsers demand https before exposing motion sensors, and a LAN hub
has no hostname, so the certificate's subject alternative name carries the IP
literal clients will type. RSA 2048 is used for compatibility with very old
TLS stacks.
"""

from __future__ import annotations

import datetime
import ipaddress
from dataclasses import dataclass
from pathlib import Path

from cryptography import x509
from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric import rsa
from cryptography.x509.oid import NameOID


class CertError(Exception):
    def __init__(self, code: str, detail: str = ""):
        super().__init__(f"{code}: {detail}" if detail else code)
        self.code = code
        self.detail = detail


@dataclass(frozen=True)
class CertPair:
    cert_path: Path
    key_path: Path


def generate_certificate(ip: str, validity_days: int, out_dir) -> CertPair:
    """Emit cert.pem + key.pem under out_dir, SAN bound to the given IP."""
    try:
        addr = ipaddress.ip_address(ip)
    except ValueError as exc:
        raise CertError("invalid-ip", str(exc))
    if not isinstance(validity_days, int) or validity_days < 1:
        raise CertError("invalid-validity", f"validity_days={validity_days!r} must be >= 1")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    key = rsa.generate_private_key(public_exponent=65537, key_size=2048)

    name = x509.Name([
        x509.NameAttribute(NameOID.COMMON_NAME, str(addr)),
        x509.NameAttribute(NameOID.ORGANIZATION_NAME, "zombihub"),
    ])
    now = datetime.datetime.now(datetime.timezone.utc)
    cert = (
        x509.CertificateBuilder()
        .subject_name(name)
        .issuer_name(name)
        .public_key(key.public_key())
        .serial_number(x509.random_serial_number())
        .not_valid_before(now - datetime.timedelta(minutes=5))
        .not_valid_after(now + datetime.timedelta(days=validity_days))
        .add_extension(x509.SubjectAlternativeName([x509.IPAddress(addr)]),
                       critical=False)
        .add_extension(x509.BasicConstraints(ca=True, path_length=None), critical=True)
        .sign(key, hashes.SHA256())
    )

    cert_path = out / "cert.pem"
    key_path = out / "key.pem"
    try:
        cert_path.write_bytes(cert.public_bytes(serialization.Encoding.PEM))
        key_path.write_bytes(key.private_bytes(
            serialization.Encoding.PEM,
            serialization.PrivateFormat.TraditionalOpenSSL,
            serialization.NoEncryption(),
        ))
    except OSError as exc:
        raise CertError("write-failed", str(exc))
    return CertPair(cert_path=cert_path, key_path=key_path)
