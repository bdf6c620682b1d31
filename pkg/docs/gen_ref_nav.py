"""Generate one code reference page per module of the package, plus the navigation."""

from pathlib import Path

import mkdocs_gen_files

PACKAGE = Path("ceshock")
SKIPPED = {"__main__"}

nav = mkdocs_gen_files.Nav()

for source in sorted(PACKAGE.glob("*.py")):
    if source.stem in SKIPPED:
        continue

    if source.stem == "__init__":
        ident, page = PACKAGE.name, Path(PACKAGE.name, "index.md")
        nav[(PACKAGE.name,)] = page.as_posix()
    else:
        ident = f"{PACKAGE.name}.{source.stem}"
        page = Path(PACKAGE.name, f"{source.stem}.md")
        nav[(PACKAGE.name, source.stem)] = page.as_posix()

    with mkdocs_gen_files.open(Path("reference", page), "w") as fd:
        print(f"::: {ident}", file=fd)
    mkdocs_gen_files.set_edit_path(Path("reference", page), Path("..") / source)

with mkdocs_gen_files.open("reference/SUMMARY.md", "w") as nav_file:
    nav_file.writelines(nav.build_literate_nav())
