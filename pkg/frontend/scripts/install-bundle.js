// Copy the built bundle into the hub's asset root so the Python package
// serves it at /client/zombitron.js.
const fs = require("fs");
const path = require("path");

const src = path.join(__dirname, "..", "dist", "zombitron.js");
const dest = path.join(__dirname, "..", "..", "src", "zombihub", "assets",
                       "zombitron.js");
fs.copyFileSync(src, dest);
console.log("installed", path.relative(process.cwd(), dest),
            `(${fs.statSync(dest).size} bytes)`);
