# Copyright 2024-2025 NetCracker Technology Corporation
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


import importlib.util
import os
import sys


def create_exclude_tags_robot_command(tags) -> str:
    return " ".join(f'-e {tag}' for tag in sorted(tags))


def create_exclude_tags_description(tags: dict) -> str:
    if not tags:
        return ""
    lines = [f'{tag}: {reason}' for tag, reason in sorted(tags.items())]
    return "Excluded acceptance tags\n" + "\n".join(lines)


def load_resolver(path):
    spec = importlib.util.spec_from_file_location(os.path.basename(path)[:-3], location=path)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def resolve_robot_tags(start_directory, resolver_name="tags_exclusion.py", environ=None):
    """Collect tags from every resolver module under start_directory.

    A resolver exposes get_excluded_tags(environ) returning a list of tags or a
    dict of tag -> reason.
    """
    environ = os.environ if environ is None else environ
    reasons = {}
    for root, _, files in os.walk(start_directory):
        if resolver_name in files:
            tags = load_resolver(os.path.join(root, resolver_name)).get_excluded_tags(environ)
            if isinstance(tags, dict):
                reasons.update(tags)
            else:
                reasons.update({tag: "" for tag in tags})
    return reasons


if __name__ == "__main__":
    excluded = resolve_robot_tags(sys.argv[1] if len(sys.argv) > 1 else "./tests")
    print(f'{create_exclude_tags_robot_command(excluded)};{create_exclude_tags_description(excluded)};')
