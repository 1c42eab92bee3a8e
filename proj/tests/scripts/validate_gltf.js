// Runs the Khronos glTF validator on a .glb and prints a one-line summary.
// Exit status: 0 when the asset has no errors, 1 otherwise, 2 on usage errors.
const fs = require('fs');
const path = require('path');

const [, , file, modules] = process.argv;
if (!file) {
  console.error('usage: validate_gltf.js <file.glb> [node_modules dir]');
  process.exit(2);
}
const validator = require(modules ? path.join(modules, 'gltf-validator') : 'gltf-validator');

validator
  .validateBytes(new Uint8Array(fs.readFileSync(file)), {uri: path.basename(file), maxIssues: 100})
  .then((report) => {
    const issues = report.issues;
    console.log(`errors=${issues.numErrors} warnings=${issues.numWarnings} infos=${issues.numInfos}`);
    for (const m of issues.messages.filter((m) => m.severity === 0)) {
      console.log(`  ${m.code} ${m.pointer || ''} ${m.message}`);
    }
    process.exit(issues.numErrors === 0 ? 0 : 1);
  })
  .catch((e) => {
    console.error(`validator failed: ${e}`);
    process.exit(1);
  });
