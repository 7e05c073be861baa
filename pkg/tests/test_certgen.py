import subprocess

import pytest

from zombihub import certgen as cg


def openssl_text(cert_path):
    """Independent inspector: the openssl CLI, not the generating library."""
    return subprocess.run(
        ["openssl", "x509", "-in", str(cert_path), "-noout", "-text"],
        check=True, capture_output=True, text=True).stdout


class TestGenerate:
    def test_san_contains_tethering_gateway_ip(self, tmp_path):
        pair = cg.generate_certificate("192.168.43.1", 365, tmp_path)
        text = openssl_text(pair.cert_path)
        assert "IP Address:192.168.43.1" in text
        assert "Subject Alternative Name" in text

    def test_key_matches_cert(self, tmp_path):
        pair = cg.generate_certificate("10.0.0.7", 30, tmp_path)
        cert_mod = subprocess.run(
            ["openssl", "x509", "-in", str(pair.cert_path), "-noout", "-modulus"],
            check=True, capture_output=True, text=True).stdout
        key_mod = subprocess.run(
            ["openssl", "rsa", "-in", str(pair.key_path), "-noout", "-modulus"],
            check=True, capture_output=True, text=True).stdout
        assert cert_mod == key_mod

    def test_ipv6_supported(self, tmp_path):
        pair = cg.generate_certificate("fd00::1", 10, tmp_path)
        assert "IP Address:FD00:0:0:0:0:0:0:1" in openssl_text(pair.cert_path)

    def test_validity_days_zero_invalid(self, tmp_path):
        with pytest.raises(cg.CertError) as err:
            cg.generate_certificate("192.168.43.1", 0, tmp_path)
        assert err.value.code == "invalid-validity"

    def test_bad_ip_rejected(self, tmp_path):
        with pytest.raises(cg.CertError) as err:
            cg.generate_certificate("not-an-ip", 365, tmp_path)
        assert err.value.code == "invalid-ip"

    def test_validity_window(self, tmp_path):
        pair = cg.generate_certificate("192.168.1.2", 365, tmp_path)
        check = subprocess.run(
            ["openssl", "x509", "-in", str(pair.cert_path), "-noout",
             "-checkend", str(300 * 24 * 3600)],
            capture_output=True, text=True)
        assert check.returncode == 0  # still valid 300 days out
