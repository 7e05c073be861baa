"""Command-line entry point: serve, certgen, bridge, simulate, specs.

Exit codes: 0 success, 1 runtime failure, 2 usage error (argparse default).
"""

from __future__ import annotations

import argparse
import asyncio
import json
import signal
import sys
from pathlib import Path

from . import certgen as cg
from . import harness as hz
from . import osc as oscmod
from . import protocol as pr
from .server import ConfigError, HubConfig, HubServer
from .surfaces import SurfaceError, load_spec_file


def _cmd_serve(args) -> int:
    try:
        if args.config:
            config = HubConfig.from_file(args.config)
        else:
            config = HubConfig()
        if args.host:
            config.host = args.host
        if args.port:
            config.port = args.port
        if args.cert:
            config.cert_path = Path(args.cert)
        if args.key:
            config.key_path = Path(args.key)

        on_publish = None
        bridge = None
        if config.osc_host and config.osc_port:
            rules = []
            if config.osc_config_path:
                rules = oscmod.load_mappings(Path(config.osc_config_path).read_text())
            bridge = oscmod.OscBridge(rules, oscmod.OscSender(config.osc_host,
                                                              config.osc_port))
            on_publish = bridge.on_publish

        server = HubServer(config, on_publish=on_publish)
    except (ConfigError, OSError, oscmod.OscError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    scheme = "wss" if config.tls else "ws"
    print(f"zombihub serving on {scheme}://{config.host}:{config.port}/ws "
          f"({len(server.surfaces)} surfaces)")
    try:
        asyncio.run(server.serve_forever())
    except KeyboardInterrupt:
        pass
    return 0


def _cmd_certgen(args) -> int:
    try:
        pair = cg.generate_certificate(args.ip, args.days, args.out)
    except cg.CertError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.json:
        print(json.dumps({"cert": str(pair.cert_path), "key": str(pair.key_path)}))
    else:
        print(f"certificate: {pair.cert_path}")
        print(f"private key: {pair.key_path}")
    return 0


def _cmd_simulate(args) -> int:
    try:
        scenario = hz.load_scenario_file(args.scenario)
        report = hz.simulate(scenario, url=args.url)
    except (hz.ScenarioError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.json:
        print(report.to_json())
    else:
        rtt = report.rtt_stats()
        print(f"scenario {report.scenario} ({report.mode}): "
              f"{sum(u['sent'] for u in report.per_unit.values())} sent, "
              f"{sum(report.delivery.values())} delivered, "
              f"{report.ordering_violations} ordering violations, "
              f"convergence={'ok' if report.convergence_ok else 'FAILED'}")
        if rtt:
            print(f"rtt ms: min {rtt['min']:.2f} median {rtt['median']:.2f} "
                  f"p95 {rtt['p95']:.2f} (n={rtt['count']})")
        for failure in report.capability_failures:
            print(f"capability failure: {failure['unit']} missing {failure['missing']}")
    return 0 if report.passed() else 1


def _cmd_specs_validate(args) -> int:
    code = 0
    for path in args.files:
        try:
            spec = load_spec_file(path)
        except (SurfaceError, OSError) as exc:
            print(f"{path}: INVALID ({exc})")
            code = 1
            continue
        print(f"{path}: ok ({spec.name}, {len(spec.controls)} controls, "
              f"requires {sorted(spec.requires)})")
    return code


async def _run_bridge(config_path: Path) -> int:
    """Standalone bridge: join the hub as a client subscribed to everything and
    forward each routed message as OSC. SIGHUP reloads the mapping file."""
    from websockets.asyncio.client import connect

    def load():
        obj = json.loads(config_path.read_text())
        rules = oscmod.load_mappings(json.dumps({"mappings": obj.get("mappings", [])}))
        return obj, rules

    obj, rules = load()
    sender = oscmod.OscSender(obj.get("dest_host", "127.0.0.1"),
                              int(obj.get("dest_port", 9000)))
    url = obj.get("hub_url", "ws://127.0.0.1:8000/ws")
    state = {"rules": rules}

    def reload_handler(*_):
        try:
            _, state["rules"] = load()
            print("bridge: mappings reloaded", file=sys.stderr)
        except (OSError, json.JSONDecodeError, oscmod.OscError) as exc:
            print(f"bridge: reload failed: {exc}", file=sys.stderr)

    try:
        asyncio.get_running_loop().add_signal_handler(signal.SIGHUP, reload_handler)
    except NotImplementedError:
        pass

    caps = pr.CapabilityProfile(touch=False, accelerometer=False, gyroscope=False,
                                secure_transport=True)
    seq = 0
    async with connect(url, max_size=64 * 1024, ping_interval=None) as ws:
        hello = pr.make_envelope("osc-bridge", seq, 0,
                                 pr.Hello(roles=frozenset({pr.Role.CLIENT}), caps=caps,
                                          requested_id="osc-bridge"))
        await ws.send(pr.encode_envelope(hello))
        seq += 1
        sub = pr.make_envelope("osc-bridge", seq, 0,
                               pr.Subscribe(topics=(pr.Topic("*"),)))
        await ws.send(pr.encode_envelope(sub))
        seq += 1
        async for frame in ws:
            try:
                env = pr.decode_envelope(frame)
            except pr.ProtocolError:
                continue
            if isinstance(env.payload, pr.Ping):
                seq += 1
                pong = pr.make_envelope("osc-bridge", seq, env.ts_ms,
                                        pr.Pong(nonce=env.payload.nonce,
                                                hub_ts_ms=env.ts_ms))
                await ws.send(pr.encode_envelope(pong))
                continue
            for packet in oscmod.map_message(env, state["rules"]):
                sender.send(packet)
    return 0


def _cmd_bridge(args) -> int:
    try:
        return asyncio.run(_run_bridge(Path(args.config)))
    except (OSError, json.JSONDecodeError, oscmod.OscError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zombihub",
                                     description="Control hub for fleets of old "
                                                 "browser-bearing devices")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the hub")
    p.add_argument("--config", help="hub config file (JSON)")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--cert", help="TLS certificate (PEM)")
    p.add_argument("--key", help="TLS private key (PEM)")
    p.set_defaults(fn=_cmd_serve)

    p = sub.add_parser("certgen", help="generate an IP-bound self-signed certificate")
    p.add_argument("--ip", required=True)
    p.add_argument("--days", type=int, default=365)
    p.add_argument("--out", default="certs")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_certgen)

    p = sub.add_parser("bridge", help="forward hub traffic to OSC over UDP")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=_cmd_bridge)

    p = sub.add_parser("simulate", help="run a scripted-client scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--url", help="connect to an already-running hub")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("specs", help="surface spec tools")
    spec_sub = p.add_subparsers(dest="specs_command", required=True)
    v = spec_sub.add_parser("validate", help="validate surface spec files")
    v.add_argument("files", nargs="+")
    v.set_defaults(fn=_cmd_specs_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
