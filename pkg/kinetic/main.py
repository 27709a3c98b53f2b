# kinetic/main.py
import argparse
import configparser
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from kinetic import settings
from kinetic.commands import algebra_check, limits, meanfield, morphism_check, nbody, vlasov1d
from kinetic.errors import EXIT_CONFIG, ConfigError, KineticError

APP_NAME = "kinetic"
APP_VER = "1.0"

# =========================
# Subcomandos (el orden es el de la ayuda)
# =========================
COMMANDS = {
    m.NAME: m
    for m in (algebra_check, morphism_check, nbody, vlasov1d, meanfield, limits)
}

log = logging.getLogger("kinetic")


def _fault_triple(raw: str):
    try:
        l, j, r = (int(p) for p in raw.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("se espera l,j,r (tres enteros separados por coma)")
    return (l, j, r)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=APP_NAME, description="Estructuras hamiltonianas de la teoría cinética")
    parser.add_argument("--version", action="version", version=f"{APP_NAME} {APP_VER}")
    sub = parser.add_subparsers(dest="command", metavar="COMANDO")
    for name, module in COMMANDS.items():
        p = sub.add_parser(name, help=module.HELP, description=module.HELP)
        p.add_argument("--config", help="archivo .ini (sección [run]) o .json con los parámetros")
        p.add_argument("--seed", type=int, help="semilla u64")
        p.add_argument("--out", help="ruta de salida ('-' = stdout)")
        p.add_argument("--mode", choices=("exact", "float"))
        p.add_argument("--fault-injection", type=_fault_triple, metavar="L,J,R",
                       help="multiplica C_{ℓjNr} por 2 para ese (ℓ,j,r)")
        p.add_argument("-v", "--verbose", action="count", default=0)
    return parser


# =========================
# Configuración
# =========================
def _ini_value(raw: str) -> Any:
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def read_config_file(path: str) -> Dict[str, Any]:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"no se pudo leer {path}: {e}")

    if p.suffix.lower() == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: JSON inválido ({e})")
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: se esperaba un objeto JSON")
        return data

    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # claves sensibles a mayúsculas (N, L, V, Nx...)
    try:
        parser.read_string(text, source=path)
    except configparser.Error as e:
        raise ConfigError(f"{path}: INI inválido ({e})")
    extra = [s for s in parser.sections() if s != "run"]
    if extra:
        raise ConfigError(f"{path}: secciones desconocidas {extra}; sólo se admite [run]")
    if not parser.has_section("run"):
        return {}
    return {k: _ini_value(v) for k, v in parser.items("run")}


def load_config(module, args: argparse.Namespace):
    data: Dict[str, Any] = read_config_file(args.config) if args.config else {}
    for key in ("seed", "out", "mode"):
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    if args.fault_injection is not None:
        if "fault_injection" not in module.Config.model_fields:
            raise ConfigError(f"{module.NAME} no admite --fault-injection")
        data["fault_injection"] = args.fault_injection
    try:
        return module.Config.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"configuración inválida para {module.NAME}", payload=e.errors(include_url=False))


def _setup_logging(verbose: int) -> None:
    level = settings.log_level()
    if verbose == 1:
        level = min(level, logging.INFO)
    elif verbose >= 2:
        level = logging.DEBUG
    logging.basicConfig(
        stream=sys.stderr,
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


# =========================
# Entry point
# =========================
def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse sale con 2 ante argumentos inválidos; --help/--version con 0
        return EXIT_CONFIG if e.code else 0
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_CONFIG

    _setup_logging(args.verbose)
    module = COMMANDS[args.command]
    try:
        cfg = load_config(module, args)
        log.info("%s: seed=%d mode=%s out=%s", module.NAME, cfg.seed, cfg.mode, cfg.out or "-")
        with settings.degree_cap(cfg.effective_cap()):
            return module.run(cfg)
    except KineticError as e:
        log.error("%s: %s", module.NAME, e.detail)
        if e.payload is not None:
            sys.stderr.write(json.dumps(e.payload, indent=2, default=str, ensure_ascii=False) + "\n")
        return e.code
    except Exception:
        log.exception("%s: error inesperado", module.NAME)
        return 1


if __name__ == "__main__":
    sys.exit(main())
