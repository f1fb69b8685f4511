"""Source to LTS in one call, shared by the command line and the tests."""
from __future__ import annotations

from dataclasses import dataclass

from .environment import Composition, build_composition
from .frontend import parse_source
from .project import limits_of, source_path
from .statespace import Exploration, explore_system, hide_actions, rename_actions
from .transformer import transform_program


class TransformFailed(Exception):
    def __init__(self, diagnostics):
        super().__init__("\n".join(str(d) for d in diagnostics))
        self.diagnostics = diagnostics


@dataclass
class Generated:
    composition: Composition
    exploration: Exploration
    lts: object  # after hiding and renaming
    models: dict


def models_for(source: str, filename="<input>") -> dict:
    tu = parse_source(source, filename)
    return transform_program(tu, filename=filename)


def _used_classes(project: dict) -> set:
    used = {project["targetClass"]}
    for inst in project.get("instances", {}).values():
        if inst.get("kind", "transformed") == "transformed":
            used.add(inst.get("class"))
    return used


def generate_from_source(project: dict, source: str, filename="<input>", keep_configs=False) -> Generated:
    models = models_for(source, filename)
    errors = [d for name in sorted(_used_classes(project) & set(models))
              for d in models[name].diagnostics if d.severity == "error"]
    if errors:
        raise TransformFailed(errors)
    comp = build_composition(project, models)
    ex = explore_system(comp, limits_of(project), keep_configs=keep_configs)
    lts = rename_actions(hide_actions(ex.lts, comp.hide), comp.rename)
    return Generated(comp, ex, lts, models)


def generate(project: dict, project_path, keep_configs=False) -> Generated:
    path = source_path(project, project_path)
    return generate_from_source(project, path.read_text(), str(path), keep_configs)
